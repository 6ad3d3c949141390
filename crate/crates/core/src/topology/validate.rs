use std::fmt;

use super::builders::digits_for;
use super::{reachable_outputs, ChannelKind, Network, NetworkKind};
use crate::routing::RoutingTable;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks structural invariants, full access and deadlock freedom.
pub fn validate_network(net: &Network) -> ValidationReport {
    let mut v: Vec<String> = net.wiring_faults().to_vec();
    let n = net.n_terminals();

    if net.input_terminals().len() != net.output_terminals().len() {
        v.push(format!(
            "terminal count mismatch: {} inputs, {} outputs",
            net.input_terminals().len(),
            net.output_terminals().len()
        ));
    }

    for r in net.routers() {
        if r.n_in == 0 || r.n_out == 0 {
            v.push(format!("router {} has no input or no output ports", r.id));
        }
        for p in 0..r.n_in {
            if net.input_attachment(r.id, p).is_none() {
                v.push(format!("port unattached: router {} input {p}", r.id));
            }
        }
        for p in 0..r.n_out {
            if net.output_attachment(r.id, p).is_none() {
                v.push(format!("port unattached: router {} output {p}", r.id));
            }
        }
    }

    for c in net.channels() {
        if c.kind == ChannelKind::IntraStage && !net.kind().is_flattened() {
            v.push(format!(
                "intra-stage channel {} in unflattened network",
                c.id
            ));
        }
    }

    let k = net.radix();
    match net.kind() {
        kind if kind.is_delta() => match digits_for(n, k) {
            Ok(s) => {
                check_uniform(net, s, n / k, &mut v);
                if net.routers().iter().any(|r| r.n_in != k || r.n_out != k) {
                    v.push(format!("delta routers must be {k}x{k}"));
                }
            }
            Err(e) => v.push(e.to_string()),
        },
        NetworkKind::Benes => match digits_for(n, 2) {
            Ok(s) => check_uniform(net, 2 * s - 1, n / 2, &mut v),
            Err(e) => v.push(e.to_string()),
        },
        _ => {}
    }

    if v.is_empty() {
        for src in 0..n {
            let reach = reachable_outputs(net, src);
            if reach.len() != n {
                v.push(format!(
                    "full access violated: input {src} reaches {} of {n} outputs",
                    reach.len()
                ));
            }
        }
        if !RoutingTable::build(net).channel_dependence_acyclic() {
            v.push("channel dependence graph has a cycle".to_string());
        }
    }

    ValidationReport { violations: v }
}

fn check_uniform(net: &Network, stages: usize, per_stage: usize, v: &mut Vec<String>) {
    if net.stage_count() != stages {
        v.push(format!(
            "expected {stages} stages, found {}",
            net.stage_count()
        ));
    }
    if net.stages().iter().any(|s| s.len() != per_stage) {
        v.push(format!("expected {per_stage} routers per stage"));
    }
}
