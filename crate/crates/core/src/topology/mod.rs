//! Staged router/channel graphs for multistage interconnection networks.
//!
//! A [`Network`] is an immutable list of routers arranged in stages, the
//! unidirectional channels between their ports, and the bindings of the `N`
//! input and `N` output terminals. Every router port is attached to exactly
//! one channel or one terminal.
//!
//! Flattening merges routers of several original stages into one router. Each
//! router therefore remembers the span of original stages (`layers`) it
//! covers, and each channel the original stage it leaves from (`layer`). A
//! packet inside a router sits at one original layer of its span; it may take
//! an intra-stage channel only if that channel's layer is not behind it. This
//! keeps every route monotone in the original stage order.

pub(crate) mod builders;
mod export;
mod flatten;
mod paths;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use builders::{
    build_baseline, build_benes, build_butterfly, build_clos, build_delta, build_generalized_cube,
    build_omega, perfect_shuffle, ClosParams, DeltaKind,
};
pub use export::{to_dot, to_json};
pub use flatten::{full_flatten, meta_flatten, FlattenMethod};
pub use paths::{enumerate_paths, reachable_outputs};
pub use validate::{validate_network, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Input,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub router: usize,
    pub side: Side,
    pub port: usize,
}

impl PortRef {
    pub fn input(router: usize, port: usize) -> Self {
        Self {
            router,
            side: Side::Input,
            port,
        }
    }

    pub fn output(router: usize, port: usize) -> Self {
        Self {
            router,
            side: Side::Output,
            port,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    InterStage,
    IntraStage,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub id: usize,
    pub src: PortRef,
    pub dst: PortRef,
    pub kind: ChannelKind,
    /// Original stage the wire leaves from.
    pub layer: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Router {
    pub id: usize,
    pub stage: usize,
    pub row: usize,
    pub n_in: usize,
    pub n_out: usize,
    /// Inclusive span of original stages merged into this router.
    pub layers: (usize, usize),
}

impl Router {
    pub fn degree(&self) -> usize {
        self.n_in + self.n_out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkKind {
    Omega,
    Butterfly,
    Baseline,
    GeneralizedCube,
    Benes,
    Clos,
    Flattened,
    MfGrouped,
    MfFull,
}

impl NetworkKind {
    pub fn is_delta(self) -> bool {
        matches!(
            self,
            Self::Omega | Self::Butterfly | Self::Baseline | Self::GeneralizedCube
        )
    }

    pub fn is_flattened(self) -> bool {
        matches!(self, Self::Flattened | Self::MfGrouped | Self::MfFull)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Omega => "omega",
            Self::Butterfly => "butterfly",
            Self::Baseline => "baseline",
            Self::GeneralizedCube => "generalized-cube",
            Self::Benes => "benes",
            Self::Clos => "clos",
            Self::Flattened => "flattened",
            Self::MfGrouped => "mf-grouped",
            Self::MfFull => "mf",
        }
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What sits on the far side of a router port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attachment {
    Channel(usize),
    Terminal(usize),
}

/// Where a packet ends up after leaving a router through an output port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop {
    Deliver(usize),
    Forward {
        channel: usize,
        router: usize,
        in_port: usize,
        position: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct Network {
    kind: NetworkKind,
    base: Option<NetworkKind>,
    n_terminals: usize,
    radix: usize,
    stages: Vec<Vec<usize>>,
    routers: Vec<Router>,
    channels: Vec<Channel>,
    input_terminals: Vec<PortRef>,
    output_terminals: Vec<PortRef>,
    #[serde(skip)]
    in_attach: Vec<Vec<Option<Attachment>>>,
    #[serde(skip)]
    out_attach: Vec<Vec<Option<Attachment>>>,
    #[serde(skip)]
    wiring_faults: Vec<String>,
}

impl Network {
    /// Assembles a network from raw parts. Wiring problems (dangling or doubly
    /// attached ports, out-of-range references) do not fail here; they are
    /// reported by [`validate_network`].
    pub fn from_parts(
        kind: NetworkKind,
        base: Option<NetworkKind>,
        radix: usize,
        routers: Vec<Router>,
        channels: Vec<Channel>,
        input_terminals: Vec<PortRef>,
        output_terminals: Vec<PortRef>,
    ) -> Self {
        let n_stages = routers.iter().map(|r| r.stage + 1).max().unwrap_or(0);
        let mut stages = vec![Vec::new(); n_stages];
        for r in &routers {
            stages[r.stage].push(r.id);
        }

        let mut faults = Vec::new();
        let mut in_attach: Vec<Vec<Option<Attachment>>> =
            routers.iter().map(|r| vec![None; r.n_in]).collect();
        let mut out_attach: Vec<Vec<Option<Attachment>>> =
            routers.iter().map(|r| vec![None; r.n_out]).collect();

        let mut attach = |p: PortRef, what: Attachment, faults: &mut Vec<String>| {
            let table = match p.side {
                Side::Input => &mut in_attach,
                Side::Output => &mut out_attach,
            };
            match table
                .get_mut(p.router)
                .and_then(|ports| ports.get_mut(p.port))
            {
                None => faults.push(format!(
                    "port out of range: router {} {:?} port {}",
                    p.router, p.side, p.port
                )),
                Some(slot @ None) => *slot = Some(what),
                Some(Some(_)) => faults.push(format!(
                    "port attached more than once: router {} {:?} port {}",
                    p.router, p.side, p.port
                )),
            }
        };

        for c in &channels {
            if c.src.side != Side::Output || c.dst.side != Side::Input {
                faults.push(format!("channel {} has reversed endpoints", c.id));
                continue;
            }
            attach(c.src, Attachment::Channel(c.id), &mut faults);
            attach(c.dst, Attachment::Channel(c.id), &mut faults);
        }
        for (t, p) in input_terminals.iter().enumerate() {
            if p.side != Side::Input {
                faults.push(format!("input terminal {t} bound to an output port"));
                continue;
            }
            attach(*p, Attachment::Terminal(t), &mut faults);
        }
        for (t, p) in output_terminals.iter().enumerate() {
            if p.side != Side::Output {
                faults.push(format!("output terminal {t} bound to an input port"));
                continue;
            }
            attach(*p, Attachment::Terminal(t), &mut faults);
        }

        Self {
            kind,
            base,
            n_terminals: input_terminals.len(),
            radix,
            stages,
            routers,
            channels,
            input_terminals,
            output_terminals,
            in_attach,
            out_attach,
            wiring_faults: faults,
        }
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    /// Kind of the network a flattened network was derived from.
    pub fn base_kind(&self) -> Option<NetworkKind> {
        self.base
    }

    pub fn n_terminals(&self) -> usize {
        self.n_terminals
    }

    pub fn radix(&self) -> usize {
        self.radix
    }

    pub fn stages(&self) -> &[Vec<usize>] {
        &self.stages
    }

    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }

    pub fn routers(&self) -> &[Router] {
        &self.routers
    }

    pub fn router(&self, id: usize) -> &Router {
        &self.routers[id]
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn input_terminals(&self) -> &[PortRef] {
        &self.input_terminals
    }

    pub fn output_terminals(&self) -> &[PortRef] {
        &self.output_terminals
    }

    pub fn input_attachment(&self, router: usize, port: usize) -> Option<Attachment> {
        self.in_attach[router][port]
    }

    pub fn output_attachment(&self, router: usize, port: usize) -> Option<Attachment> {
        self.out_attach[router][port]
    }

    pub(crate) fn wiring_faults(&self) -> &[String] {
        &self.wiring_faults
    }

    /// Human-readable name, e.g. `mf-butterfly` or `omega`.
    pub fn label(&self) -> String {
        match (self.kind, self.base) {
            (NetworkKind::Flattened, Some(b)) => format!("flattened-{b}"),
            (NetworkKind::MfFull, Some(b)) => format!("mf-{b}"),
            (NetworkKind::MfGrouped, Some(b)) => format!("mf-grouped-{b}"),
            (k, _) => k.name().to_string(),
        }
    }

    /// Number of distinct original layers a router can hold a packet at.
    pub fn positions(&self, router: usize) -> usize {
        let (lo, hi) = self.routers[router].layers;
        hi - lo + 1
    }

    /// Original layer a packet occupies after arriving on `in_port`.
    pub fn entry_position(&self, router: usize, in_port: usize) -> usize {
        match self.in_attach[router][in_port] {
            Some(Attachment::Channel(c)) => self.channels[c].layer + 1,
            _ => self.routers[router].layers.0,
        }
    }

    /// Result of leaving `router` through `out_port` while at layer
    /// `position`, or `None` when that move would go backwards through a
    /// merged stage.
    pub fn hop(&self, router: usize, position: usize, out_port: usize) -> Option<Hop> {
        match self.out_attach[router][out_port]? {
            Attachment::Terminal(t) => Some(Hop::Deliver(t)),
            Attachment::Channel(c) => {
                let ch = &self.channels[c];
                if ch.kind == ChannelKind::IntraStage && ch.layer < position {
                    return None;
                }
                Some(Hop::Forward {
                    channel: c,
                    router: ch.dst.router,
                    in_port: ch.dst.port,
                    position: ch.layer + 1,
                })
            }
        }
    }

    /// Total external ports (input plus output terminals).
    pub fn terminal_port_count(&self) -> usize {
        self.input_terminals.len() + self.output_terminals.len()
    }
}
