use cogame::equilibria::{ConvClass, ConvWitness, ProductState};
use cogame::oracle::Payoffs;
use cogame::verdict::{Deviation, SgpeRow, Step};
use cogame::{CoSystem, Evidence, ParamRef, Verdict};

fn letters(steps: &[Step]) -> String {
    steps.iter().map(|s| s.choice.letter()).collect()
}

fn at(sys: &CoSystem, r: &ParamRef) -> String {
    match r.offset {
        0 => format!("{}(n)", sys.names[r.class]),
        k => format!("{}(n+{k})", sys.names[r.class]),
    }
}

fn owners(sys: &CoSystem, classes: &[usize]) -> String {
    let names: Vec<&str> = classes
        .iter()
        .map(|&c| sys.classes[c].owner().map_or("leaf", |a| a.name()))
        .collect();
    format!("[{}]", names.join(", "))
}

pub fn row(sys: &CoSystem, r: &SgpeRow) -> String {
    let range = match r.n_max {
        Some(max) if max == r.n_min => format!("n = {max}"),
        Some(max) => format!("{} <= n <= {max}", r.n_min),
        None => format!("n >= {}", r.n_min),
    };
    format!(
        "{}: {} chooses {}, favored {} vs other {}, d(n) = {} for {range}",
        sys.names[r.class], r.owner, r.choice, r.favored, r.other, r.margin
    )
}

pub fn deviation(sys: &CoSystem, d: &Deviation) -> String {
    let mut path = letters(&d.prefix);
    if !d.cycle.is_empty() {
        path.push_str(&format!("({})^{}", letters(&d.cycle), d.repeat));
    }
    path.push_str(&letters(&d.suffix));
    format!(
        "{} plays {path} and reaches {} at n = {}: {} > {}",
        d.agent, sys.names[d.leaf], d.index, d.value, d.baseline
    )
}

pub fn payoffs(p: &Payoffs) -> String {
    let parts: Vec<String> = p.iter().map(|(a, v)| format!("{a}: {v}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Human-readable lines for the evidence of a verdict.
pub fn evidence(sys: &CoSystem, v: &Verdict) -> Vec<String> {
    match &v.evidence {
        Evidence::LeafPath { refs, choices } => {
            let path: String = choices.iter().map(|c| c.letter()).collect();
            let end = refs.last().map(|r| at(sys, r)).unwrap_or_default();
            vec![format!("path {path} ends at {end}")]
        }
        Evidence::ChoiceCycle { prefix, cycle } => vec![format!(
            "cycle witness {} after {} steps",
            owners(sys, cycle),
            prefix.len()
        )],
        Evidence::FailingClass { class, cycle } => vec![format!(
            "from {} the choices loop through {}",
            sys.names[*class],
            owners(sys, cycle)
        )],
        Evidence::NashOptima { agents } => agents
            .iter()
            .map(|o| format!("{}: on path {}, best deviation {}", o.agent, o.on_path, o.best_deviation))
            .collect(),
        Evidence::Deviation(d) => vec![deviation(sys, d)],
        Evidence::FiniteDeviation {
            agent,
            baseline,
            value,
            overrides,
        } => {
            let moves: Vec<String> = overrides.iter().map(|o| format!("node {} -> {}", o.node, o.choice)).collect();
            vec![format!("{agent} gets {value} > {baseline} by {}", moves.join(", "))]
        }
        Evidence::SgpeTable { rows } => rows.iter().map(|r| row(sys, r)).collect(),
        Evidence::SgpeViolation {
            row: r,
            index,
            favored,
            other,
        } => vec![
            row(sys, r),
            format!("at n = {index}: chosen side pays {favored} < {other}"),
        ],
        Evidence::Distinguishing { path, left, right } => {
            let p: String = path.iter().map(|c| c.letter()).collect();
            let p = if p.is_empty() { "the root".to_owned() } else { format!("path {p}") };
            vec![format!("differ at {p}: {left} vs {right}")]
        }
        Evidence::Preservation { source, target } => vec![
            format!("source: {source}"),
            format!("target: {target}"),
        ],
        Evidence::AlwaysLeaf { .. }
        | Evidence::Relation { .. }
        | Evidence::BoundedAgreement { .. }
        | Evidence::None
        | Evidence::Vacuous | Evidence::Invalid { .. } => Vec::new(),
    }
}

fn pair(a: &CoSystem, b: &CoSystem, st: &ProductState) -> String {
    format!("({}, {}, shift {})", a.names[st.left], b.names[st.right], st.delta)
}

pub fn conversion(a: &CoSystem, b: &CoSystem, c: &ConvClass) -> Vec<String> {
    match &c.witness {
        ConvWitness::Finite { differences } => vec![format!("{differences} differing node pairs, none recurring")],
        ConvWitness::Mismatch { path, state, reason } => {
            let p: String = path.iter().map(|c| c.letter()).collect();
            vec![format!("at {} after path '{p}': {reason}", pair(a, b, state))]
        }
        ConvWitness::Recurring { cycle, difference } => {
            let states: Vec<String> = cycle.iter().map(|st| pair(a, b, st)).collect();
            vec![
                format!("choices differ at {}", pair(a, b, difference)),
                format!("which recurs after the cycle {}", states.join(" -> ")),
            ]
        }
    }
}
