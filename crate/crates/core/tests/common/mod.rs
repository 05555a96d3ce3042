#![allow(dead_code)]

use dpsod::engine::{apply_rule, candidate_rules, MutationRule, Shift, Side};
use dpsod::ktheory::{k_minus1_total, model_map, ComponentModel, ModelMap};
use dpsod::shipped::{script_text, Bundled};
use dpsod::sod::{Decomposition, FactStore, Support};
use dpsod::{parse_script, replay_with_imports, BlowupGeometry, ReplayError, ReplayScript};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn load(name: &str, d: i64) -> ReplayScript {
    parse_script(script_text(name).unwrap()).unwrap().with_degree(d)
}

pub fn run(name: &str, script: &ReplayScript) -> Result<Decomposition, ReplayError> {
    let mut store = FactStore::new(script.degree);
    replay_with_imports(name, script, &mut store, &Bundled).map(|(d, _)| d)
}

fn shifted(at: usize) -> Vec<usize> {
    vec![at + 1, at.saturating_sub(1)]
        .into_iter()
        .filter(|&x| x != at)
        .collect()
}

/// Every variant of `rule` with exactly one parameter changed.
pub fn corruptions(rule: &MutationRule) -> Vec<MutationRule> {
    use MutationRule::*;
    let flip = |s: Side| if s == Side::Left { Side::Right } else { Side::Left };
    let mut out = Vec::new();
    match rule.clone() {
        BlowupExpand { at, center, codim } => {
            out.extend(shifted(at).into_iter().map(|at| BlowupExpand {
                at,
                center: center.clone(),
                codim,
            }));
            let other = if center == "L" { "C" } else { "L" };
            out.push(BlowupExpand {
                at,
                center: other.into(),
                codim,
            });
            out.push(BlowupExpand {
                at,
                center,
                codim: codim + 1,
            });
        }
        SerreRotate { side, from, to } => {
            out.push(SerreRotate {
                side: flip(side),
                from,
                to,
            });
            out.extend(shifted(from).into_iter().map(|from| SerreRotate { side, from, to }));
            out.extend(shifted(to).into_iter().map(|to| SerreRotate { side, from, to }));
        }
        TriangleExchange { at, support, target } => {
            out.extend(
                shifted(at)
                    .into_iter()
                    .map(|at| TriangleExchange { at, support, target }),
            );
            let other = if support == Support::E { Support::D } else { Support::E };
            out.push(TriangleExchange {
                at,
                support: other,
                target,
            });
            out.extend(
                (1..=3)
                    .filter(|&t| t != target)
                    .map(|target| TriangleExchange { at, support, target }),
            );
        }
        OrthogonalSwap { at } => out.extend(shifted(at).into_iter().map(|at| OrthogonalSwap { at })),
        FiberRebase { at, shift } => {
            out.extend(shifted(at).into_iter().map(|at| FiberRebase { at, shift }));
            let other = if shift == Shift::Plus {
                Shift::Minus
            } else {
                Shift::Plus
            };
            out.push(FiberRebase { at, shift: other });
        }
        OpaqueTranspose { at, side } => {
            out.extend(shifted(at).into_iter().map(|at| OpaqueTranspose { at, side }));
            out.push(OpaqueTranspose { at, side: flip(side) });
        }
    }
    out
}

/// How a corrupted script was rejected, or `None` if it replayed cleanly.
pub fn rejection(name: &str, script: &ReplayScript) -> Option<&'static str> {
    match run(name, script) {
        Ok(_) => None,
        Err(ReplayError::FinalMismatch { .. }) => Some("FinalMismatch"),
        Err(ReplayError::Step { source, .. }) => Some(match source {
            dpsod::RuleError::SideConditionFailed { .. } => "SideConditionFailed",
            dpsod::RuleError::PerfectnessUnknown { .. } => "PerfectnessUnknown",
            dpsod::RuleError::PositionOutOfRange { .. } => "PositionOutOfRange",
            dpsod::RuleError::Geometry(_) => "Geometry",
        }),
        Err(_) => Some("other"),
    }
}

/// `(script, step index, corrupted rule, outcome)` for every single-parameter
/// corruption of every step of the shipped scripts.
pub fn mutation_harness() -> Vec<(String, usize, String, Option<&'static str>)> {
    let mut results = Vec::new();
    for (name, d) in [
        ("prop-Y-to-V.sod", 5),
        ("prop-Y-to-V.sod", 4),
        ("prop-Y-to-W-4.sod", 4),
        ("prop-Y-to-W-5.sod", 5),
    ] {
        let script = load(name, d);
        for (k, step) in script.steps.iter().enumerate() {
            for bad in corruptions(&step.rule) {
                let mut s = script.clone();
                s.steps[k].rule = bad.clone();
                results.push((format!("{name}@d={d}"), k + 1, bad.to_string(), rejection(name, &s)));
            }
        }
    }
    results
}

/// Models for every opaque name the shipped scripts produce.
pub fn walk_models(d: i64) -> ModelMap {
    let nodes = if d == 4 { 2 } else { 3 };
    model_map([
        ComponentModel::nodal_curve("A_V", nodes),
        ComponentModel::nodal_curve("Db(C)", nodes),
        ComponentModel::chain("A_C", 3).unwrap(),
        ComponentModel::quadric("A_Q", true),
    ])
}

/// Every intermediate decomposition of the shipped replays on `Y_d`, with a
/// store holding the facts those replays establish.
pub fn replay_states(d: i64) -> (Vec<Decomposition>, FactStore) {
    let geom = BlowupGeometry::new(d).unwrap();
    let mut store = FactStore::new(d);
    let mut states = Vec::new();
    let w = if d == 4 {
        "prop-Y-to-W-4.sod"
    } else {
        "prop-Y-to-W-5.sod"
    };
    for name in ["prop-Y-to-V.sod", w] {
        let s = load(name, d);
        let mut cur = s.axiom.rewritten(dpsod::Basis::HE).unwrap();
        store
            .record_decomposition(&cur, dpsod::sod::Provenance::Axiom { source: name.into() })
            .unwrap();
        states.push(cur.clone());
        for step in &s.steps {
            cur = apply_rule(&cur, &step.rule, &mut store, &geom).unwrap().decomposition;
            states.push(cur.clone());
        }
    }
    (states, store)
}

pub struct WalkSummary {
    pub applications: usize,
    pub violations: Vec<String>,
    pub rule_counts: std::collections::BTreeMap<&'static str, usize>,
}

/// Random walk of valid rule applications starting from every replay
/// state, checking that `K_{-1}` and the multiset of opaque components never
/// change.
pub fn random_walk(seed: u64, steps_per_start: usize) -> WalkSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = WalkSummary {
        applications: 0,
        violations: Vec::new(),
        rule_counts: Default::default(),
    };
    for d in [4, 5] {
        let geom = BlowupGeometry::new(d).unwrap();
        let models = walk_models(d);
        let (states, base_store) = replay_states(d);
        for start in states {
            let mut store = base_store.clone();
            let k0 = k_minus1_total(&start, &models).unwrap();
            let names: Vec<String> = start.opaque_names().into_iter().map(String::from).collect();
            let mut cur = start;
            for _ in 0..steps_per_start {
                let mut rules = candidate_rules(cur.len());
                rules.shuffle(&mut rng);
                let Some(next) = rules.iter().find_map(|r| {
                    let mut trial = store.clone();
                    apply_rule(&cur, r, &mut trial, &geom)
                        .ok()
                        .map(|o| (r.rule_id(), o.decomposition, trial))
                }) else {
                    break;
                };
                let (id, dec, trial) = next;
                store = trial;
                summary.applications += 1;
                *summary.rule_counts.entry(id).or_default() += 1;
                let k = k_minus1_total(&dec, &models).unwrap();
                let now: Vec<String> = dec.opaque_names().into_iter().map(String::from).collect();
                if k != k0 || now != names {
                    summary.violations.push(format!("{id} on {cur} gave {dec}"));
                }
                cur = dec;
            }
        }
    }
    summary
}

/// Nodal instances for the defect suite: `(label, hypersurface)`.
///
/// Cubic threefolds get their nodes at coordinate points and, separately,
/// at seeded random integer points in linearly general position.
pub fn defect_instances(seed: u64) -> Vec<(String, dpsod::NodalHypersurface)> {
    use dpsod::lattice::rational_rank;
    use dpsod::wps::point;
    use dpsod::{build_nodal_hypersurface, WeightedSpace};
    use num_rational::BigRational;
    use rand::Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let p4 = WeightedSpace::projective(4);
    for mu in 1..=4 {
        let coord: Vec<_> = (0..mu)
            .map(|i| {
                let mut c = [0i64; 5];
                c[i] = 1;
                point(&c)
            })
            .collect();
        out.push((
            format!("cubic in P^4, {mu} node(s) at coordinate points"),
            build_nodal_hypersurface(&p4, 3, &coord, seed).unwrap(),
        ));
        let general = loop {
            let pts: Vec<Vec<BigRational>> = (0..mu)
                .map(|_| {
                    let mut c: Vec<i64> = (0..5).map(|_| rng.random_range(-4..=4)).collect();
                    c[0] = rng.random_range(1..=4);
                    point(&c)
                })
                .collect();
            if rational_rank(&pts, 5) == mu {
                break pts;
            }
        };
        out.push((
            format!("cubic in P^4, {mu} node(s) in general position"),
            build_nodal_hypersurface(&p4, 3, &general, seed).unwrap(),
        ));
    }
    let quartic = WeightedSpace::new(vec![1, 1, 1, 1, 2]).unwrap();
    out.push((
        "quartic in P(1,1,1,1,2), 1 node".into(),
        build_nodal_hypersurface(&quartic, 4, &[point(&[1, 0, 0, 0, 0])], seed).unwrap(),
    ));
    let sextic = WeightedSpace::new(vec![1, 1, 1, 2, 3]).unwrap();
    out.push((
        "sextic in P(1,1,1,2,3), 1 node".into(),
        build_nodal_hypersurface(&sextic, 6, &[point(&[1, 0, 0, 0, 0])], seed).unwrap(),
    ));
    out
}

/// Number of monomials of weighted degree `deg`, by direct search over
/// bounded exponent vectors.
pub fn brute_force_monomials(weights: &[u32], deg: i64) -> usize {
    fn go(w: &[u32], left: i64) -> usize {
        match w.split_first() {
            None => usize::from(left == 0),
            Some((&first, rest)) => (0..=left / first as i64)
                .map(|e| go(rest, left - e * first as i64))
                .sum(),
        }
    }
    go(weights, deg)
}

/// Dimension of a path algebra by listing every arrow word up to length
/// `max_len` and keeping the composable ones without a zero relation.
pub fn brute_force_path_count(q: &dpsod::Quiver, max_len: usize) -> usize {
    let arrows = &q.arrows;
    let mut count = q.vertices.len();
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    for _ in 1..=max_len {
        words = words
            .iter()
            .flat_map(|w| (0..arrows.len()).map(move |a| [w.clone(), vec![a]].concat()))
            .collect();
        count += words
            .iter()
            .filter(|w| {
                let composable = w.windows(2).all(|p| arrows[p[0]].target == arrows[p[1]].source);
                let names: Vec<&str> = w.iter().map(|&a| arrows[a].name.as_str()).collect();
                let killed = q.relations.iter().any(|r| {
                    names
                        .windows(r.len())
                        .any(|win| win.iter().zip(r).all(|(x, y)| *x == y.as_str()))
                });
                composable && !killed
            })
            .count();
    }
    count
}
