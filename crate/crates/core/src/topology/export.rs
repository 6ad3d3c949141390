use std::fmt::Write;

use serde::Serialize;

use super::{ChannelKind, Network};

#[derive(Serialize)]
struct Document<'a> {
    label: String,
    #[serde(flatten)]
    network: &'a Network,
}

/// Pretty-printed JSON listing routers, channels and terminal bindings.
pub fn to_json(net: &Network) -> String {
    let mut s = serde_json::to_string_pretty(&Document {
        label: net.label(),
        network: net,
    })
    .expect("network serialization is infallible");
    s.push('\n');
    s
}

/// Graphviz rendering; intra-stage channels are dashed.
pub fn to_dot(net: &Network) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{}\" {{", net.label());
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=box];");
    for (t, stage) in net.stages().iter().enumerate() {
        let _ = writeln!(out, "  subgraph stage{t} {{ rank=same;");
        for &r in stage {
            let router = net.router(r);
            let _ = writeln!(
                out,
                "    r{r} [label=\"r{r}\\n{}x{}\"];",
                router.n_in, router.n_out
            );
        }
        let _ = writeln!(out, "  }}");
    }
    for (t, p) in net.input_terminals().iter().enumerate() {
        let _ = writeln!(
            out,
            "  in{t} [shape=circle]; in{t} -> r{} [headlabel=\"{}\"];",
            p.router, p.port
        );
    }
    for c in net.channels() {
        let style = match c.kind {
            ChannelKind::InterStage => "",
            ChannelKind::IntraStage => ", style=dashed",
        };
        let _ = writeln!(
            out,
            "  r{} -> r{} [taillabel=\"{}\", headlabel=\"{}\"{style}];",
            c.src.router, c.dst.router, c.src.port, c.dst.port
        );
    }
    for (t, p) in net.output_terminals().iter().enumerate() {
        let _ = writeln!(
            out,
            "  out{t} [shape=circle]; r{} -> out{t} [taillabel=\"{}\"];",
            p.router, p.port
        );
    }
    out.push_str("}\n");
    out
}
