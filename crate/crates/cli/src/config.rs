//! Run configs and model files: flat `key = value` text with `[section]`
//! headers. Keys before the first header form the general section.
//!
//! A model file lists one section per Lorentz pole:
//!
//! ```text
//! [electric]
//! plasma = 1.6e16     ; rad/s
//! resonance = 1.5e16
//! damping = 1e14
//! [magnetic]
//! ...
//! ```
//!
//! A model file with no sections is vacuum.

use emforce::{Error, LorentzPole, Result, SusceptibilityModel};
use ini::{Ini, Properties};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn read(path: &Path) -> Result<(Ini, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| config_err(format!("{}: not UTF-8", path.display())))?;
    let ini = Ini::load_from_str(text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    Ok((ini, bytes))
}

/// One section with typed getters. Every key must be read or is reported as
/// unknown by [`Section::finish`].
pub struct Section<'a> {
    name: String,
    props: Option<&'a Properties>,
    used: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn new(name: &str, props: Option<&'a Properties>) -> Self {
        Section { name: name.to_string(), props, used: BTreeSet::new() }
    }

    fn raw(&mut self, key: &str) -> Option<&'a str> {
        self.used.insert(key.to_string());
        self.props.and_then(|p| p.get(key))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        let name = self.name.clone();
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                v.trim().parse().map(Some).map_err(|_| config_err(format!("[{name}] {key}: cannot parse {v:?}")))
            }
        }
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn f64_opt(&mut self, key: &str) -> Result<Option<f64>> {
        self.parse(key)
    }

    pub fn f64_req(&mut self, key: &str) -> Result<f64> {
        let name = self.name.clone();
        self.parse(key)?.ok_or_else(|| config_err(format!("[{name}] missing {key}")))
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn i64_or(&mut self, key: &str, default: i64) -> Result<i64> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn str_opt(&mut self, key: &str) -> Option<&'a str> {
        self.raw(key).map(str::trim)
    }

    /// Rejects keys that were never asked for.
    pub fn finish(self) -> Result<()> {
        if let Some(p) = self.props {
            for (k, _) in p.iter() {
                if !self.used.contains(k) {
                    return Err(config_err(format!("[{}] unknown key {k:?}", self.name)));
                }
            }
        }
        Ok(())
    }
}

/// A loaded run config plus every file it pulled in, for hashing.
pub struct RunConfig {
    ini: Ini,
    dir: PathBuf,
    hasher: Sha256,
    sections: BTreeSet<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let (ini, bytes) = read(path)?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(RunConfig { ini, dir, hasher, sections: BTreeSet::new() })
    }

    /// Keys before the first header.
    pub fn general(&mut self) -> Section<'_> {
        self.sections.insert(String::new());
        Section::new("general", Some(self.ini.general_section()))
    }

    pub fn section(&mut self, name: &str) -> Section<'_> {
        self.sections.insert(name.to_string());
        let props = self.ini.section(Some(name));
        Section::new(name, props)
    }

    /// Loads a model file named relative to the config's directory.
    pub fn model(&mut self, file: &str) -> Result<SusceptibilityModel> {
        let path = self.dir.join(file);
        let (ini, bytes) = read(&path)?;
        self.hasher.update(&bytes);
        parse_model(&ini).map_err(|e| match e {
            Error::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Rejects sections nobody read; returns the SHA-256 of the config and
    /// model files in load order.
    pub fn finish(self) -> Result<String> {
        for (name, props) in self.ini.iter() {
            let key = name.unwrap_or("");
            if !self.sections.contains(key) {
                return Err(config_err(format!("unknown section [{key}]")));
            }
            if name.is_none() && !props.is_empty() && !self.sections.contains("") {
                return Err(config_err("unexpected keys before the first section"));
            }
        }
        Ok(hex::encode(self.hasher.finalize()))
    }
}

fn parse_model(ini: &Ini) -> Result<SusceptibilityModel> {
    if !ini.general_section().is_empty() {
        return Err(config_err("model keys must sit inside [electric] or [magnetic] sections"));
    }
    let mut electric = Vec::new();
    let mut magnetic = Vec::new();
    for (name, props) in ini.iter() {
        let list = match name {
            None => continue,
            Some("electric") => &mut electric,
            Some("magnetic") => &mut magnetic,
            Some(other) => return Err(config_err(format!("unknown model section [{other}]"))),
        };
        let mut s = Section::new(name.unwrap(), Some(props));
        let pole = LorentzPole::new(s.f64_req("plasma")?, s.f64_req("resonance")?, s.f64_req("damping")?)?;
        s.finish()?;
        list.push(pole);
    }
    SusceptibilityModel::new(electric, magnetic)
}
