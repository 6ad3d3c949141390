//! Row-wise merging of stages: full flattening and meta-flattening.

use serde::{Deserialize, Serialize};

use super::{Channel, ChannelKind, Network, NetworkKind, PortRef, Router};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlattenMethod {
    /// Merge intermediate stages two at a time.
    #[serde(alias = "grouped", alias = "a")]
    GroupedPairs,
    /// Merge every intermediate stage into a single stage.
    #[serde(alias = "all", alias = "b")]
    AllIntermediate,
}

/// Merges the routers of every stage row-wise into a single stage.
pub fn full_flatten(net: &Network) -> Result<Network> {
    check_mergeable(net)?;
    let s = net.stage_count();
    if s < 2 {
        return Err(Error::TooFewStages {
            needed: 2,
            found: s,
        });
    }
    merge_groups(net, &[(0, s - 1)], NetworkKind::Flattened)
}

/// Keeps the first and last stages and merges the intermediate ones.
pub fn meta_flatten(net: &Network, method: FlattenMethod) -> Result<Network> {
    check_mergeable(net)?;
    let s = net.stage_count();
    if s < 3 {
        return Err(Error::TooFewStages {
            needed: 3,
            found: s,
        });
    }
    let mid = s - 2;
    let mut groups = vec![(0, 0)];
    let kind = match method {
        FlattenMethod::AllIntermediate => {
            groups.push((1, s - 2));
            NetworkKind::MfFull
        }
        FlattenMethod::GroupedPairs => {
            if !mid.is_multiple_of(2) {
                return Err(Error::OddIntermediate(mid));
            }
            groups.extend((0..mid / 2).map(|g| (1 + 2 * g, 2 + 2 * g)));
            NetworkKind::MfGrouped
        }
    };
    groups.push((s - 1, s - 1));
    merge_groups(net, &groups, kind)
}

fn check_mergeable(net: &Network) -> Result<()> {
    if net.kind().is_flattened() {
        return Err(Error::AlreadyFlattened);
    }
    if !(net.kind().is_delta() || net.kind() == NetworkKind::Benes) {
        return Err(Error::UnsupportedTransform(net.kind().name()));
    }
    Ok(())
}

/// `groups` are inclusive, contiguous, covering stage ranges.
fn merge_groups(net: &Network, groups: &[(usize, usize)], kind: NetworkKind) -> Result<Network> {
    let rows = net.stages()[0].len();
    if net.stages().iter().any(|s| s.len() != rows) {
        return Err(Error::UnsupportedTransform(net.kind().name()));
    }
    let mut group_of = vec![0; net.stage_count()];
    for (g, &(lo, hi)) in groups.iter().enumerate() {
        group_of[lo..=hi].fill(g);
    }
    let new_id = |old: usize| {
        let r = net.router(old);
        group_of[r.stage] * rows + r.row
    };

    let mut routers: Vec<Router> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, &(lo, hi))| {
            (0..rows).map(move |row| {
                let first = net.router(net.stages()[lo][row]);
                let last = net.router(net.stages()[hi][row]);
                Router {
                    id: g * rows + row,
                    stage: g,
                    row,
                    n_in: first.n_in,
                    n_out: last.n_out,
                    layers: (first.layers.0, last.layers.1),
                }
            })
        })
        .collect();

    let mut channels = Vec::new();
    for c in net.channels() {
        let (src, dst) = (net.router(c.src.router), net.router(c.dst.router));
        let (ns, nd) = (new_id(c.src.router), new_id(c.dst.router));
        if group_of[src.stage] != group_of[dst.stage] {
            channels.push(Channel {
                id: 0,
                src: PortRef::output(ns, c.src.port),
                dst: PortRef::input(nd, c.dst.port),
                kind: c.kind,
                layer: c.layer,
            });
        } else if ns != nd {
            let out_port = routers[ns].n_out;
            routers[ns].n_out += 1;
            let in_port = routers[nd].n_in;
            routers[nd].n_in += 1;
            channels.push(Channel {
                id: 0,
                src: PortRef::output(ns, out_port),
                dst: PortRef::input(nd, in_port),
                kind: ChannelKind::IntraStage,
                layer: c.layer,
            });
        }
    }
    channels.sort_by_key(|c| (c.src.router, c.src.port));
    for (i, c) in channels.iter_mut().enumerate() {
        c.id = i;
    }

    let remap = |p: &PortRef| PortRef {
        router: new_id(p.router),
        ..*p
    };
    let input_terminals = net.input_terminals().iter().map(remap).collect();
    let output_terminals = net.output_terminals().iter().map(remap).collect();

    Ok(Network::from_parts(
        kind,
        Some(net.kind()),
        net.radix(),
        routers,
        channels,
        input_terminals,
        output_terminals,
    ))
}
