//! Randomized checks of the surrogates against the brute-force oracles and
//! of the Lipschitz and stability bounds the online analysis relies on.
//!
//! Every check runs in `f64` and is deterministic in its seed.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, Label, LabeledPoint, WeightVector};
use crate::error::Result;
use crate::metrics::raw_pauc;
use crate::online::{penalty_lipschitz_ratio, PenaltyLedger};
use crate::oracle::{brute_force_pauc, brute_force_structural, brute_force_top_beta, pairwise_auc, pairwise_hinge, ranked_deviation};
use crate::surrogate::{select_top_beta_negatives, MeasureSpec};

pub const ORACLE_TOLERANCE: f64 = 1e-9;
pub const PAUC_TOLERANCE: f64 = 1e-12;
pub const SUBGRADIENT_SLACK: f64 = 1e-8;
pub const RANK_LIPSCHITZ_FACTOR: f64 = 3.0;
pub const STABILITY_FACTOR: f64 = 8.0;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Largest observed gap or ratio.
    pub worst: f64,
    pub limit: f64,
}

impl CheckResult {
    fn new(name: impl Into<String>, limit: f64) -> Self {
        CheckResult {
            name: name.into(),
            trials: 0,
            violations: 0,
            worst: 0.0,
            limit,
        }
    }

    fn record(&mut self, observed: f64, ok: bool) {
        self.trials += 1;
        if observed > self.worst || observed.is_nan() {
            self.worst = observed;
        }
        if !ok {
            self.violations += 1;
        }
    }

    fn record_gap(&mut self, gap: f64) {
        self.record(gap, gap <= self.limit);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.trials > 0
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} trials={:<5} violations={:<3} worst={:.3e} limit={:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.violations,
            self.worst,
            self.limit
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Runs every check with `trials` trials each.
pub fn run_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut checks = structural_oracle(trials, seed)?;
    checks.push(pauc_oracle(trials, seed.wrapping_add(1))?);
    checks.extend(rank_lipschitz(trials, seed.wrapping_add(2))?);
    checks.push(stability(StabilityMeasure::PrecAtK, trials, seed.wrapping_add(3))?);
    checks.push(stability(StabilityMeasure::Prbep, trials, seed.wrapping_add(4))?);
    checks.extend(subgradient_validity(trials, seed.wrapping_add(5))?);
    checks.extend(telescoping(trials, seed.wrapping_add(6))?);
    checks.extend(beta_one_consistency(trials, seed.wrapping_add(7))?);
    Ok(SuiteReport { checks })
}

/// Random instance generator. Every fourth instance is drawn from a coarse
/// grid so that ties in scores are common.
struct Gen {
    rng: ChaCha8Rng,
    draws: usize,
}

impl Gen {
    fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
        }
    }

    fn quantized(&self) -> bool {
        self.draws % 4 == 3
    }

    fn next_instance(&mut self) {
        self.draws += 1;
    }

    fn unit_ball(&mut self, dim: usize) -> Vec<f64> {
        if self.quantized() {
            // Steps of 0.2 in [-0.4, 0.4]: norms stay below 1 for dim <= 5.
            return (0..dim).map(|_| 0.2 * self.rng.random_range(-2i32..=2) as f64).collect();
        }
        let mut v: Vec<f64> = (0..dim).map(|_| self.rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let radius = self.rng.random::<f64>().powf(1.0 / dim as f64);
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x *= radius / norm);
        }
        v
    }

    fn model(&mut self, dim: usize, max_norm: f64) -> WeightVector<f64> {
        if self.quantized() {
            return WeightVector::from_vec((0..dim).map(|_| self.rng.random_range(-2i32..=2) as f64).collect());
        }
        let v = self.unit_ball(dim);
        WeightVector::from_vec(v.into_iter().map(|x| x * max_norm).collect())
    }

    fn point(&mut self, dim: usize, pos_rate: f64) -> LabeledPoint<f64> {
        let label = if self.rng.random_bool(pos_rate) { Label::Positive } else { Label::Negative };
        LabeledPoint::dense(&self.unit_ball(dim), label)
    }

    /// `t` points with at least `min_pos` positives and `min_neg` negatives.
    fn points(&mut self, t: usize, dim: usize, min_pos: usize, min_neg: usize) -> Vec<LabeledPoint<f64>> {
        let rate = self.rng.random_range(0.1..0.9);
        let mut pts: Vec<_> = (0..t).map(|_| self.point(dim, rate)).collect();
        let fix = |want: usize, label: Label, pts: &mut Vec<LabeledPoint<f64>>, rng: &mut ChaCha8Rng| {
            while pts.iter().filter(|p| p.label() == label).count() < want {
                let i = rng.random_range(0..pts.len());
                if pts[i].label() != label {
                    pts[i] = pts[i].with_label(label);
                }
            }
        };
        fix(min_pos, Label::Positive, &mut pts, &mut self.rng);
        fix(min_neg, Label::Negative, &mut pts, &mut self.rng);
        pts
    }

    /// A beta in (0, 1].
    fn fraction(&mut self) -> f64 {
        if self.quantized() {
            [0.1, 0.25, 0.5, 1.0][self.rng.random_range(0..4)]
        } else {
            self.rng.random_range(0.01..=1.0)
        }
    }

    /// A k in (0, 1).
    fn open_fraction(&mut self) -> f64 {
        if self.quantized() {
            [0.1, 0.25, 0.5, 0.75][self.rng.random_range(0..4)]
        } else {
            self.rng.random_range(0.01..0.99)
        }
    }
}

fn refs(points: &[LabeledPoint<f64>]) -> Vec<&LabeledPoint<f64>> {
    points.iter().collect()
}

/// Sort-based Prec@k, PRBEP and F-measure surrogates against exhaustive
/// enumeration over labelings (`t <= 12`, `d <= 5`, `||w|| <= 5`).
pub fn structural_oracle(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    for (offset, name) in ["preck", "prbep", "fmeasure"].into_iter().enumerate() {
        let mut gen = Gen::new(seed.wrapping_add(offset as u64 * 1000));
        let mut check = CheckResult::new(format!("oracle/{name}"), ORACLE_TOLERANCE);
        for _ in 0..trials {
            gen.next_instance();
            let t = gen.rng.random_range(1..=12);
            let dim = gen.rng.random_range(1..=5);
            let normalize = gen.rng.random_bool(0.5);
            let spec = match name {
                "preck" => MeasureSpec::prec_at_k(gen.open_fraction())?,
                "prbep" => MeasureSpec::prbep(),
                _ => MeasureSpec::fmeasure(),
            }
            .with_normalize(normalize);
            let min_pos = usize::from(name != "preck");
            let pts = gen.points(t, dim, min_pos, 0);
            let w = gen.model(dim, 5.0);
            let r = refs(&pts);
            let fast = spec.value(&r, &w)?;
            let slow = brute_force_structural(&r, &w, &spec)?;
            check.record_gap((fast - slow).abs());
        }
        out.push(check);
    }
    Ok(out)
}

/// Top-beta selection and pAUC surrogate against the indicator-based brute
/// force (`t <= 50`). Selections must agree exactly.
pub fn pauc_oracle(trials: usize, seed: u64) -> Result<CheckResult> {
    let mut gen = Gen::new(seed);
    let mut check = CheckResult::new("oracle/pauc", PAUC_TOLERANCE);
    for _ in 0..trials {
        gen.next_instance();
        let t = gen.rng.random_range(2..=50);
        let dim = gen.rng.random_range(1..=5);
        let beta = gen.fraction();
        let normalize = gen.rng.random_bool(0.5);
        let pts = gen.points(t, dim, 1, 1);
        let w = gen.model(dim, 5.0);
        let r = refs(&pts);
        let mut fast_sel = select_top_beta_negatives(&r, &w, beta)?.selected;
        fast_sel.sort_unstable();
        let slow_sel = brute_force_top_beta(&r, &w, beta)?;
        let spec = MeasureSpec::pauc(beta)?.with_normalize(normalize);
        let fast = spec.value(&r, &w)?;
        let slow = brute_force_pauc(&r, &w, beta, normalize)?;
        let gap = (fast - slow).abs() / slow.abs().max(1.0);
        check.record(gap, fast_sel == slow_sel && gap <= PAUC_TOLERANCE);
    }
    Ok(check)
}

/// Rank-wise Lipschitz bound on sorted shifted scores, for the identity and
/// for `c -> min(c, M)`. Reports the ratio to `||w - w'||`.
pub fn rank_lipschitz(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut gen = Gen::new(seed);
    let mut ident = CheckResult::new("rank/identity", RANK_LIPSCHITZ_FACTOR);
    let mut capped = CheckResult::new("rank/capped", RANK_LIPSCHITZ_FACTOR);
    for _ in 0..trials {
        gen.next_instance();
        let t = gen.rng.random_range(1..=50);
        let dim = gen.rng.random_range(1..=5);
        let pts = gen.points(t, dim, 0, 0);
        let w = gen.model(dim, 5.0);
        let w2 = if gen.rng.random_bool(0.3) {
            // Nearby models stress the small-distance regime.
            let delta = gen.model(dim, 1e-3);
            let mut near = w.clone();
            near.add_scaled(1.0, &delta);
            near
        } else {
            gen.model(dim, 5.0)
        };
        let offsets: Vec<f64> = (0..t).map(|_| gen.rng.random_range(-2.0..2.0)).collect();
        let cap: f64 = gen.rng.random_range(-1.0..1.0);
        let dist = w.distance(&w2);
        let r = refs(&pts);
        for (check, dev) in [
            (&mut ident, ranked_deviation(&r, &w, &w2, &offsets, |c| c)?),
            (&mut capped, ranked_deviation(&r, &w, &w2, &offsets, |c: f64| c.min(cap))?),
        ] {
            let ratio = if dist > 0.0 { dev / dist } else { 0.0 };
            check.record(ratio, dev <= RANK_LIPSCHITZ_FACTOR * dist + 1e-12);
        }
    }
    Ok(vec![ident, capped])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityMeasure {
    PrecAtK,
    Prbep,
}

/// Lipschitz ratio of the single-point penalty `L_t(w)` over random
/// prefixes (`t <= 50`, points in the unit ball). PRBEP prefixes hold at
/// least one positive.
pub fn stability(measure: StabilityMeasure, trials: usize, seed: u64) -> Result<CheckResult> {
    let mut gen = Gen::new(seed);
    let name = match measure {
        StabilityMeasure::PrecAtK => "stability/preck",
        StabilityMeasure::Prbep => "stability/prbep",
    };
    let mut check = CheckResult::new(name, STABILITY_FACTOR);
    for _ in 0..trials {
        gen.next_instance();
        let t = gen.rng.random_range(1..=50);
        let dim = gen.rng.random_range(1..=5);
        let spec = match measure {
            StabilityMeasure::PrecAtK => MeasureSpec::prec_at_k(gen.open_fraction())?,
            StabilityMeasure::Prbep => MeasureSpec::prbep(),
        };
        let prefix = gen.points(t - 1, dim, usize::from(measure == StabilityMeasure::Prbep && t > 1), 0);
        let new_point = gen.point(dim, 0.5);
        let w = gen.model(dim, 5.0);
        let w2 = gen.model(dim, 5.0);
        let ratio = penalty_lipschitz_ratio(&spec, &refs(&prefix), &[&new_point], &w, &w2)?;
        check.record(ratio, ratio <= STABILITY_FACTOR + 1e-9);
    }
    Ok(check)
}

fn all_measures(gen: &mut Gen) -> Result<Vec<(&'static str, MeasureSpec<f64>)>> {
    let normalize = gen.rng.random_bool(0.5);
    Ok(vec![
        ("preck", MeasureSpec::prec_at_k(gen.open_fraction())?.with_normalize(normalize)),
        ("prbep", MeasureSpec::prbep().with_normalize(normalize)),
        ("pauc", MeasureSpec::pauc(gen.fraction())?.with_normalize(normalize)),
        ("fmeasure", MeasureSpec::fmeasure().with_normalize(normalize)),
    ])
}

/// `value(w') >= value(w) + g(w)^T (w' - w) - 1e-8` for every surrogate.
pub fn subgradient_validity(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut gen = Gen::new(seed);
    let mut checks: Vec<CheckResult> = ["preck", "prbep", "pauc", "fmeasure"]
        .iter()
        .map(|n| CheckResult::new(format!("subgradient/{n}"), SUBGRADIENT_SLACK))
        .collect();
    for _ in 0..trials {
        gen.next_instance();
        let t = gen.rng.random_range(2..=30);
        let dim = gen.rng.random_range(1..=5);
        let pts = gen.points(t, dim, 1, 1);
        let r = refs(&pts);
        let w = gen.model(dim, 5.0);
        let w2 = gen.model(dim, 5.0);
        for (check, (_, spec)) in checks.iter_mut().zip(all_measures(&mut gen)?) {
            let at_w = spec.evaluate(&r, &w)?;
            let at_w2 = spec.value(&r, &w2)?;
            let mut step = w2.clone();
            step.add_scaled(-1.0, &w);
            let shortfall = at_w.value + at_w.subgradient.dot(&step) - at_w2;
            check.record(shortfall.max(0.0), shortfall <= SUBGRADIENT_SLACK);
        }
    }
    Ok(checks)
}

/// The penalties charged over a random partition of a random stream sum to
/// the loss of the whole stream.
pub fn telescoping(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut gen = Gen::new(seed);
    let mut checks: Vec<CheckResult> = ["preck", "prbep", "pauc", "fmeasure"]
        .iter()
        .map(|n| CheckResult::new(format!("telescoping/{n}"), ORACLE_TOLERANCE))
        .collect();
    for _ in 0..trials {
        gen.next_instance();
        let t = gen.rng.random_range(1..=60);
        let dim = gen.rng.random_range(1..=5);
        let pts = gen.points(t, dim, 0, 0);
        let r = refs(&pts);
        let w = gen.model(dim, 5.0);
        let mut cuts = vec![0];
        while *cuts.last().unwrap() < t {
            let next = cuts.last().unwrap() + gen.rng.random_range(1..=8);
            cuts.push(next.min(t));
        }
        for (check, (_, spec)) in checks.iter_mut().zip(all_measures(&mut gen)?) {
            let mut ledger = PenaltyLedger::new();
            for pair in cuts.windows(2) {
                ledger.charge(&spec, &r[..pair[0]], &r[pair[0]..pair[1]], &w)?;
            }
            let whole = spec.evaluate_prefix(&r, &w)?.value;
            check.record_gap((ledger.cumulative_penalty() - whole).abs());
        }
    }
    Ok(checks)
}

/// At `beta = 1` the partial measures reduce to full AUC and the full
/// pairwise hinge.
pub fn beta_one_consistency(trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    let mut gen = Gen::new(seed);
    let mut auc = CheckResult::new("beta1/raw_auc", PAUC_TOLERANCE);
    let mut hinge = CheckResult::new("beta1/surrogate", PAUC_TOLERANCE);
    for _ in 0..trials {
        gen.next_instance();
        let t = gen.rng.random_range(2..=50);
        let dim = gen.rng.random_range(1..=5);
        let pts = gen.points(t, dim, 1, 1);
        let w = gen.model(dim, 5.0);
        let r = refs(&pts);
        let d = Dataset::new(pts.clone());
        auc.record_gap((raw_pauc(&d, &w, 1.0)?.value - pairwise_auc(&r, &w)?).abs());
        let fast = MeasureSpec::pauc(1.0)?.with_normalize(false).value(&r, &w)?;
        let slow = pairwise_hinge(&r, &w)?;
        hinge.record_gap((fast - slow).abs() / slow.abs().max(1.0));
    }
    Ok(vec![auc, hinge])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let report = run_suite(40, 3).unwrap();
        assert!(report.passed(), "{report}");
        assert_eq!(report.checks.len(), 18);
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(rank_lipschitz(20, 5).unwrap(), rank_lipschitz(20, 5).unwrap());
    }

    #[test]
    fn generator_respects_unit_ball() {
        let mut gen = Gen::new(1);
        for _ in 0..200 {
            gen.next_instance();
            let pts = gen.points(10, 5, 2, 3);
            assert!(pts.iter().all(|p| p.norm() <= 1.0 + 1e-12));
            assert!(pts.iter().filter(|p| p.is_positive()).count() >= 2);
            assert!(pts.iter().filter(|p| !p.is_positive()).count() >= 3);
        }
    }
}
