//! Stderr logging gated by the STGAN_LOG environment variable
//! (quiet | info | debug; default info).

use std::sync::OnceLock;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Level {
    Quiet = 0,
    Info = 1,
    Debug = 2,
}

static LEVEL: OnceLock<Level> = OnceLock::new();

pub fn level() -> Level {
    *LEVEL.get_or_init(|| match std::env::var("STGAN_LOG").as_deref() {
        Ok("quiet") => Level::Quiet,
        Ok("debug") => Level::Debug,
        _ => Level::Info,
    })
}

// Stderr does not exist on wasm targets; logging is a no-op there.

pub fn info(msg: impl AsRef<str>) {
    if cfg!(not(target_arch = "wasm32")) && level() >= Level::Info {
        eprintln!("{}", msg.as_ref());
    }
}

pub fn warn(msg: impl AsRef<str>) {
    if cfg!(not(target_arch = "wasm32")) && level() >= Level::Info {
        eprintln!("warning: {}", msg.as_ref());
    }
}

pub fn debug(msg: impl AsRef<str>) {
    if cfg!(not(target_arch = "wasm32")) && level() >= Level::Debug {
        eprintln!("{}", msg.as_ref());
    }
}
