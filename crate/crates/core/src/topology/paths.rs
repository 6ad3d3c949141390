use std::collections::BTreeSet;

use super::{Attachment, Hop, Network};
use crate::{Error, Result};

/// All forward paths from input terminal `src` to output terminal `dst`, as
/// router-id sequences in lexicographic order, truncated to `limit`.
///
/// Routes through merged stages follow the layer-monotone rule of
/// [`Network::hop`], so every path is simple and of bounded length.
pub fn enumerate_paths(
    net: &Network,
    src: usize,
    dst: usize,
    limit: usize,
) -> Result<Vec<Vec<usize>>> {
    let n = net.n_terminals();
    for t in [src, dst] {
        if t >= n {
            return Err(Error::TerminalOutOfRange { index: t, n });
        }
    }
    let entry = net.input_terminals()[src];
    let mut found = BTreeSet::new();
    let mut trail = vec![entry.router];
    walk(
        net,
        entry.router,
        net.entry_position(entry.router, entry.port),
        dst,
        &mut trail,
        &mut found,
    );
    Ok(found.into_iter().take(limit).collect())
}

fn walk(
    net: &Network,
    router: usize,
    position: usize,
    dst: usize,
    trail: &mut Vec<usize>,
    found: &mut BTreeSet<Vec<usize>>,
) {
    for port in 0..net.router(router).n_out {
        match net.hop(router, position, port) {
            Some(Hop::Deliver(t)) if t == dst => {
                found.insert(trail.clone());
            }
            Some(Hop::Forward {
                router: next,
                position: next_pos,
                ..
            }) => {
                trail.push(next);
                walk(net, next, next_pos, dst, trail, found);
                trail.pop();
            }
            _ => {}
        }
    }
}

/// Output terminals reachable from input terminal `src`.
pub fn reachable_outputs(net: &Network, src: usize) -> BTreeSet<usize> {
    let mut seen = vec![Vec::new(); net.routers().len()];
    for (r, s) in seen.iter_mut().enumerate() {
        *s = vec![false; net.positions(r)];
    }
    let mut out = BTreeSet::new();
    let Some(entry) = net.input_terminals().get(src) else {
        return out;
    };
    if !matches!(
        net.input_attachment(entry.router, entry.port),
        Some(Attachment::Terminal(_))
    ) {
        return out;
    }
    let mut stack = vec![(entry.router, net.entry_position(entry.router, entry.port))];
    while let Some((r, pos)) = stack.pop() {
        let lo = net.router(r).layers.0;
        let Some(flag) = pos.checked_sub(lo).and_then(|i| seen[r].get_mut(i)) else {
            continue;
        };
        if *flag {
            continue;
        }
        *flag = true;
        for port in 0..net.router(r).n_out {
            match net.hop(r, pos, port) {
                Some(Hop::Deliver(t)) => {
                    out.insert(t);
                }
                Some(Hop::Forward {
                    router, position, ..
                }) => stack.push((router, position)),
                None => {}
            }
        }
    }
    out
}
