//! Built-in configuration presets, compiled into the binary.
//!
//! `--config NAME` first tries these names, then falls back to reading
//! NAME as a file path.

pub const NAMES: [&str; 4] = ["paper-fig2", "paper-fig3", "paper-fig4", "paper-fig5"];

pub fn lookup(name: &str) -> Option<&'static str> {
    match name {
        "paper-fig2" => Some(include_str!("../presets/paper-fig2.toml")),
        "paper-fig3" => Some(include_str!("../presets/paper-fig3.toml")),
        "paper-fig4" => Some(include_str!("../presets/paper-fig4.toml")),
        "paper-fig5" => Some(include_str!("../presets/paper-fig5.toml")),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FileConfig;

    #[test]
    fn all_presets_parse() {
        for name in NAMES {
            let text = lookup(name).expect(name);
            FileConfig::parse(text).expect(name);
        }
    }

    #[test]
    fn unknown_name_is_none() {
        assert!(lookup("paper-fig9").is_none());
    }
}
