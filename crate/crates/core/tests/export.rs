use std::path::PathBuf;

use minweave::topology::{build_omega, to_dot, to_json, ChannelKind};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Compares against a checked-in file; `MINWEAVE_BLESS=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("MINWEAVE_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "{} is stale", path.display());
}

#[test]
fn omega8_wiring_is_the_perfect_shuffle() {
    // Lines between stages: output line 2r+p of a stage feeds line
    // rotl(2r+p) of the next, rotated over 3 bits.
    let net = build_omega(8, 2).unwrap();
    let rotl = |x: usize| ((x << 1) | (x >> 2)) & 7;
    let stage_of = |id: usize| net.router(id).stage;
    let inter: Vec<_> = net
        .channels()
        .iter()
        .filter(|c| c.kind == ChannelKind::InterStage)
        .collect();
    assert_eq!(inter.len(), 8 * 2);
    for c in inter {
        let (a, b) = (net.router(c.src.router), net.router(c.dst.router));
        assert_eq!(stage_of(b.id), stage_of(a.id) + 1);
        let line = a.row * 2 + c.src.port;
        assert_eq!(b.row * 2 + c.dst.port, rotl(line), "{c:?}");
    }
    for (t, p) in net.input_terminals().iter().enumerate() {
        assert_eq!(net.router(p.router).row * 2 + p.port, rotl(t));
    }
}

#[test]
fn omega8_json_golden() {
    let json = to_json(&build_omega(8, 2).unwrap());
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["routers"].as_array().unwrap().len(), 12);
    golden("omega8.json", &json);
}

#[test]
fn omega8_dot_golden() {
    let dot = to_dot(&build_omega(8, 2).unwrap());
    assert_eq!(dot.matches("->").count(), 16 + 8 + 8);
    golden("omega8.dot", &dot);
}
