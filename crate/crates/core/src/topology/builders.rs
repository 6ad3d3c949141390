//! Builders for the delta family, Beneš and three-stage Clos networks.
//!
//! Uniform networks are described by line permutations: at every stage the
//! `N` lines are split into consecutive groups of `k`, one group per router,
//! and a permutation rewires the output lines of stage `t` onto the input
//! lines of stage `t + 1`. Each delta builder picks its permutations so that
//! the output port taken at stage `t` is the `t`-th most significant base-`k`
//! digit of the destination.

use serde::{Deserialize, Serialize};

use super::{Channel, ChannelKind, Network, NetworkKind, PortRef, Router};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaKind {
    Omega,
    Butterfly,
    Baseline,
    GeneralizedCube,
}

impl DeltaKind {
    pub const ALL: [DeltaKind; 4] = [
        DeltaKind::Omega,
        DeltaKind::Butterfly,
        DeltaKind::Baseline,
        DeltaKind::GeneralizedCube,
    ];
}

impl From<DeltaKind> for NetworkKind {
    fn from(k: DeltaKind) -> Self {
        match k {
            DeltaKind::Omega => NetworkKind::Omega,
            DeltaKind::Butterfly => NetworkKind::Butterfly,
            DeltaKind::Baseline => NetworkKind::Baseline,
            DeltaKind::GeneralizedCube => NetworkKind::GeneralizedCube,
        }
    }
}

/// Parameters of a symmetric three-stage Clos network: `r` ingress switches
/// with `n` inputs each, `m` middle switches, `r` egress switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosParams {
    pub n: usize,
    pub m: usize,
    pub r: usize,
}

impl ClosParams {
    pub fn terminals(&self) -> usize {
        self.n * self.r
    }

    pub fn strict_sense_nonblocking(&self) -> bool {
        self.m + 1 >= 2 * self.n
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.r == 0 {
            return Err(Error::InvalidClos(format!(
                "n, m and r must all be at least 1 (got n={}, m={}, r={})",
                self.n, self.m, self.r
            )));
        }
        Ok(())
    }
}

impl Default for ClosParams {
    fn default() -> Self {
        Self { n: 4, m: 7, r: 8 }
    }
}

/// Returns `s` with `k^s == n`.
pub(crate) fn digits_for(n: usize, k: usize) -> Result<usize> {
    if k < 2 || n < k {
        return Err(Error::InvalidSize { n, k });
    }
    let mut s = 0;
    let mut m = n;
    while m > 1 {
        if !m.is_multiple_of(k) {
            return Err(Error::InvalidSize { n, k });
        }
        m /= k;
        s += 1;
    }
    Ok(s)
}

/// k-ary perfect shuffle: rotates the base-`k` digits of `i` left by one.
pub fn perfect_shuffle(i: usize, n: usize, k: usize) -> Result<usize> {
    digits_for(n, k)?;
    if i >= n {
        return Err(Error::TerminalOutOfRange { index: i, n });
    }
    Ok(shuffle_low(i, n, k))
}

/// Rotates the digits below `block` (a power of `k`) left by one.
fn shuffle_low(i: usize, block: usize, k: usize) -> usize {
    let hi = i - i % block;
    let lo = i % block;
    hi + (lo * k) % block + (lo * k) / block
}

/// Rotates the digits below `block` right by one.
fn unshuffle_low(i: usize, block: usize, k: usize) -> usize {
    let hi = i - i % block;
    let lo = i % block;
    hi + lo / k + (lo % k) * (block / k)
}

/// Exchanges digit `d` with digit 0.
fn swap_digit(i: usize, d: usize, k: usize) -> usize {
    let w = k.pow(d as u32);
    let top = (i / w) % k;
    let low = i % k;
    i + low * w + top - top * w - low
}

struct LineWiring {
    n: usize,
    k: usize,
    stages: usize,
    /// Input terminal -> stage-0 input line.
    entry: Vec<usize>,
    /// `between[t][l]`: stage `t` output line -> stage `t+1` input line.
    between: Vec<Vec<usize>>,
    /// Last-stage output line -> output terminal.
    exit: Vec<usize>,
}

impl LineWiring {
    fn into_network(self, kind: NetworkKind) -> Network {
        let LineWiring {
            n,
            k,
            stages,
            entry,
            between,
            exit,
        } = self;
        let rows = n / k;
        let rid = |stage: usize, line: usize| stage * rows + line / k;

        let routers = (0..stages)
            .flat_map(|t| {
                (0..rows).map(move |row| Router {
                    id: t * rows + row,
                    stage: t,
                    row,
                    n_in: k,
                    n_out: k,
                    layers: (t, t),
                })
            })
            .collect();

        let mut channels = Vec::with_capacity(n * stages.saturating_sub(1));
        for (t, perm) in between.iter().enumerate() {
            for (line, &next) in perm.iter().enumerate() {
                channels.push(Channel {
                    id: channels.len(),
                    src: PortRef::output(rid(t, line), line % k),
                    dst: PortRef::input(rid(t + 1, next), next % k),
                    kind: ChannelKind::InterStage,
                    layer: t,
                });
            }
        }

        let input_terminals = entry
            .iter()
            .map(|&line| PortRef::input(rid(0, line), line % k))
            .collect();
        let mut output_terminals = vec![PortRef::output(0, 0); n];
        for (line, &term) in exit.iter().enumerate() {
            output_terminals[term] = PortRef::output(rid(stages - 1, line), line % k);
        }

        Network::from_parts(
            kind,
            None,
            k,
            routers,
            channels,
            input_terminals,
            output_terminals,
        )
    }
}

fn delta_wiring(kind: DeltaKind, n: usize, k: usize) -> Result<LineWiring> {
    let s = digits_for(n, k)?;
    let identity: Vec<usize> = (0..n).collect();
    let perm = |f: &dyn Fn(usize) -> usize| (0..n).map(f).collect::<Vec<_>>();

    let (entry, between) = match kind {
        DeltaKind::Omega => (
            perm(&|i| shuffle_low(i, n, k)),
            (0..s - 1)
                .map(|_| perm(&|i| shuffle_low(i, n, k)))
                .collect(),
        ),
        DeltaKind::Butterfly => (
            identity.clone(),
            (0..s - 1)
                .map(|t| perm(&|i| swap_digit(i, s - 1 - t, k)))
                .collect(),
        ),
        DeltaKind::Baseline => (
            identity.clone(),
            (0..s - 1)
                .map(|t| perm(&|i| unshuffle_low(i, k.pow((s - t) as u32), k)))
                .collect(),
        ),
        DeltaKind::GeneralizedCube => {
            // Stage t pairs lines that differ only in digit s-1-t; locally
            // that digit is moved to position 0.
            let local = |t: usize, i: usize| swap_digit(i, s - 1 - t, k);
            (
                perm(&|i| local(0, i)),
                (0..s - 1)
                    .map(|t| perm(&|i| local(t + 1, local(t, i))))
                    .collect(),
            )
        }
    };

    Ok(LineWiring {
        n,
        k,
        stages: s,
        entry,
        between,
        exit: identity,
    })
}

pub fn build_delta(kind: DeltaKind, n: usize, k: usize) -> Result<Network> {
    Ok(delta_wiring(kind, n, k)?.into_network(kind.into()))
}

pub fn build_omega(n: usize, k: usize) -> Result<Network> {
    build_delta(DeltaKind::Omega, n, k)
}

pub fn build_butterfly(n: usize, k: usize) -> Result<Network> {
    build_delta(DeltaKind::Butterfly, n, k)
}

pub fn build_baseline(n: usize, k: usize) -> Result<Network> {
    build_delta(DeltaKind::Baseline, n, k)
}

pub fn build_generalized_cube(n: usize, k: usize) -> Result<Network> {
    build_delta(DeltaKind::GeneralizedCube, n, k)
}

/// Beneš network on `n = 2^m` terminals: a baseline followed by its mirror
/// image, sharing the middle stage (`2m - 1` stages of `n/2` switches).
pub fn build_benes(n: usize) -> Result<Network> {
    let k = 2;
    let half = digits_for(n, k)?;
    let stages = 2 * half - 1;
    let mut between = Vec::with_capacity(stages - 1);
    for t in 0..half - 1 {
        let block = k.pow((half - t) as u32);
        between.push((0..n).map(|i| unshuffle_low(i, block, k)).collect());
    }
    for j in 0..half - 1 {
        let block = k.pow((j + 2) as u32);
        between.push((0..n).map(|i| shuffle_low(i, block, k)).collect());
    }
    let identity: Vec<usize> = (0..n).collect();
    Ok(LineWiring {
        n,
        k,
        stages,
        entry: identity.clone(),
        between,
        exit: identity,
    }
    .into_network(NetworkKind::Benes))
}

/// Three-stage Clos network with complete bipartite wiring between stages.
pub fn build_clos(params: ClosParams) -> Result<Network> {
    params.validate()?;
    let ClosParams { n, m, r } = params;

    let mut routers = Vec::with_capacity(2 * r + m);
    let mut push = |stage: usize, count: usize, n_in: usize, n_out: usize| {
        for row in 0..count {
            routers.push(Router {
                id: routers.len(),
                stage,
                row,
                n_in,
                n_out,
                layers: (stage, stage),
            });
        }
    };
    push(0, r, n, m);
    push(1, m, r, r);
    push(2, r, m, n);

    let ingress = |i: usize| i;
    let middle = |j: usize| r + j;
    let egress = |i: usize| r + m + i;

    let mut channels = Vec::with_capacity(2 * r * m);
    for i in 0..r {
        for j in 0..m {
            channels.push(Channel {
                id: channels.len(),
                src: PortRef::output(ingress(i), j),
                dst: PortRef::input(middle(j), i),
                kind: ChannelKind::InterStage,
                layer: 0,
            });
        }
    }
    for j in 0..m {
        for i in 0..r {
            channels.push(Channel {
                id: channels.len(),
                src: PortRef::output(middle(j), i),
                dst: PortRef::input(egress(i), j),
                kind: ChannelKind::InterStage,
                layer: 1,
            });
        }
    }

    let input_terminals = (0..n * r)
        .map(|t| PortRef::input(ingress(t / n), t % n))
        .collect();
    let output_terminals = (0..n * r)
        .map(|t| PortRef::output(egress(t / n), t % n))
        .collect();

    Ok(Network::from_parts(
        NetworkKind::Clos,
        None,
        n.max(m).max(r),
        routers,
        channels,
        input_terminals,
        output_terminals,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: rotate the base-k digit string left by one.
    fn rotate_digits_left(i: usize, n: usize, k: usize) -> usize {
        let mut digits = Vec::new();
        let mut m = n;
        let mut x = i;
        while m > 1 {
            digits.push(x % k);
            x /= k;
            m /= k;
        }
        digits.reverse(); // most significant first
        digits.rotate_left(1);
        digits.iter().fold(0, |acc, d| acc * k + d)
    }

    #[test]
    fn shuffle_examples() {
        assert_eq!(perfect_shuffle(0, 8, 2).unwrap(), 0);
        assert_eq!(perfect_shuffle(1, 8, 2).unwrap(), 2);
        assert_eq!(perfect_shuffle(5, 8, 2).unwrap(), 3);
    }

    #[test]
    fn shuffle_matches_digit_rotation() {
        for (n, k) in [(8, 2), (32, 2), (27, 3), (64, 4)] {
            for i in 0..n {
                assert_eq!(
                    perfect_shuffle(i, n, k).unwrap(),
                    rotate_digits_left(i, n, k)
                );
            }
        }
    }

    #[test]
    fn shuffle_rejects_bad_sizes() {
        assert!(matches!(
            perfect_shuffle(0, 12, 2),
            Err(Error::InvalidSize { .. })
        ));
        assert!(matches!(
            perfect_shuffle(0, 8, 1),
            Err(Error::InvalidSize { .. })
        ));
        assert!(matches!(
            perfect_shuffle(8, 8, 2),
            Err(Error::TerminalOutOfRange { .. })
        ));
    }

    #[test]
    fn unshuffle_inverts_shuffle() {
        for block in [2, 4, 8, 16] {
            for i in 0..32 {
                assert_eq!(unshuffle_low(shuffle_low(i, block, 2), block, 2), i);
            }
        }
    }

    #[test]
    fn swap_digit_is_an_involution() {
        for i in 0..81 {
            for d in 0..4 {
                assert_eq!(swap_digit(swap_digit(i, d, 3), d, 3), i);
            }
        }
        assert_eq!(swap_digit(0b100, 2, 2), 0b001);
    }

    #[test]
    fn delta_shapes() {
        let b = build_butterfly(16, 2).unwrap();
        assert_eq!(b.stage_count(), 4);
        assert!(b.stages().iter().all(|s| s.len() == 8));
        assert!(b.routers().iter().all(|r| r.n_in == 2 && r.n_out == 2));

        let o = build_omega(32, 2).unwrap();
        assert_eq!(o.stage_count(), 5);
        assert!(o.stages().iter().all(|s| s.len() == 16));

        let single = build_baseline(2, 2).unwrap();
        assert_eq!(single.stage_count(), 1);
        assert_eq!(single.routers().len(), 1);

        let ternary = build_generalized_cube(27, 3).unwrap();
        assert_eq!(ternary.stage_count(), 3);
        assert!(ternary.stages().iter().all(|s| s.len() == 9));
    }

    #[test]
    fn delta_rejects_non_powers() {
        assert!(matches!(
            build_omega(31, 2),
            Err(Error::InvalidSize { n: 31, k: 2 })
        ));
        assert!(build_butterfly(12, 2).is_err());
        assert!(build_baseline(1, 2).is_err());
    }

    #[test]
    fn benes_shapes() {
        let b = build_benes(32).unwrap();
        assert_eq!(b.stage_count(), 9);
        assert_eq!(b.routers().len(), 144);
        assert_eq!(build_benes(2).unwrap().routers().len(), 1);
        let b8 = build_benes(8).unwrap();
        assert_eq!(b8.stage_count(), 5);
        assert!(b8.stages().iter().all(|s| s.len() == 4));
        assert!(build_benes(24).is_err());
    }

    #[test]
    fn clos_shapes_and_flags() {
        let p = ClosParams { n: 4, m: 7, r: 8 };
        assert!(p.strict_sense_nonblocking());
        let c = build_clos(p).unwrap();
        assert_eq!(c.n_terminals(), 32);
        assert_eq!(c.stage_count(), 3);
        assert_eq!(c.stages()[1].len(), 7);
        assert!(!ClosParams { n: 4, m: 3, r: 8 }.strict_sense_nonblocking());
        assert!(build_clos(ClosParams { n: 4, m: 3, r: 8 }).is_ok());
        assert!(matches!(
            build_clos(ClosParams { n: 0, m: 3, r: 8 }),
            Err(Error::InvalidClos(_))
        ));
    }

    #[test]
    fn delta_permutations_differ() {
        let nets: Vec<_> = DeltaKind::ALL
            .iter()
            .map(|&k| build_delta(k, 16, 2).unwrap())
            .collect();
        for a in 0..nets.len() {
            for b in a + 1..nets.len() {
                let wires = |n: &Network| {
                    (
                        n.channels()
                            .iter()
                            .map(|c| (c.src, c.dst))
                            .collect::<Vec<_>>(),
                        n.input_terminals().to_vec(),
                    )
                };
                assert_ne!(wires(&nets[a]), wires(&nets[b]), "{a} vs {b}");
            }
        }
    }
}
