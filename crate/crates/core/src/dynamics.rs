//! Deterministic map models, perturbation families `D_δ = 1 + δS`, and noise
//! kernels together with their derivative kernels.

use std::sync::Arc;

use crate::error::{EngineError, Result};

/// Monotonicity of a single branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

/// One branch of a piecewise map: a domain interval and its evaluators.
#[derive(Clone)]
pub struct Branch {
    lo: f64,
    hi: f64,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    deriv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    monotonicity: Monotonicity,
}

impl Branch {
    pub fn new(
        lo: f64,
        hi: f64,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        deriv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        monotonicity: Monotonicity,
    ) -> Branch {
        assert!(lo < hi, "empty branch domain [{lo}, {hi})");
        Branch {
            lo,
            hi,
            eval,
            deriv,
            monotonicity,
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotonicity
    }

    /// Evaluate the branch formula, also outside its domain (used for
    /// one-sided limits at breakpoints).
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        (self.deriv)(x)
    }
}

/// Piecewise map of the unit interval into itself. Branch domains partition
/// `[0,1]`: `[a_i, b_i)` with the last branch closed at 1.
#[derive(Clone)]
pub struct MapModel {
    label: String,
    branches: Vec<Branch>,
    /// Points where the derivative vanishes or blows up; operator assembly
    /// must not evaluate derivatives there.
    critical_points: Vec<f64>,
    /// Location of the global maximum of T, when known.
    maximizer: Option<f64>,
}

impl MapModel {
    pub fn new(
        label: impl Into<String>,
        branches: Vec<Branch>,
        critical_points: Vec<f64>,
        maximizer: Option<f64>,
    ) -> MapModel {
        assert!(!branches.is_empty());
        assert_eq!(branches[0].lo, 0.0, "branch domains must start at 0");
        for w in branches.windows(2) {
            assert_eq!(w[0].hi, w[1].lo, "branch domains must partition [0,1]");
        }
        assert_eq!(branches.last().unwrap().hi, 1.0, "branches must end at 1");
        MapModel {
            label: label.into(),
            branches,
            critical_points,
            maximizer,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn critical_points(&self) -> &[f64] {
        &self.critical_points
    }

    pub fn maximizer(&self) -> Option<f64> {
        self.maximizer
    }

    fn branch_index(&self, x: f64) -> usize {
        // Branches are few; linear scan is fine and branch-order exact.
        for (i, b) in self.branches.iter().enumerate() {
            if x < b.hi {
                return i;
            }
        }
        self.branches.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.branches[self.branch_index(x)].eval(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.branches[self.branch_index(x)].deriv(x)
    }

    /// Interior breakpoints between branch domains.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.branches.iter().skip(1).map(|b| b.lo).collect()
    }
}

impl std::fmt::Debug for MapModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MapModel")
            .field("label", &self.label)
            .field("branches", &self.branches.len())
            .finish()
    }
}

/// Built-in map families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StandardMap {
    Doubling,
    Tent,
    /// Rotation by `θ ∈ [0,1)`; `θ = 0` is the identity.
    Rotation(f64),
}

pub fn make_standard_map(kind: StandardMap) -> MapModel {
    match kind {
        StandardMap::Doubling => MapModel::new(
            "doubling",
            vec![
                Branch::new(
                    0.0,
                    0.5,
                    Arc::new(|x| 2.0 * x),
                    Arc::new(|_| 2.0),
                    Monotonicity::Increasing,
                ),
                Branch::new(
                    0.5,
                    1.0,
                    Arc::new(|x| 2.0 * x - 1.0),
                    Arc::new(|_| 2.0),
                    Monotonicity::Increasing,
                ),
            ],
            vec![],
            None,
        ),
        StandardMap::Tent => MapModel::new(
            "tent",
            vec![
                Branch::new(
                    0.0,
                    0.5,
                    Arc::new(|x| 2.0 * x),
                    Arc::new(|_| 2.0),
                    Monotonicity::Increasing,
                ),
                Branch::new(
                    0.5,
                    1.0,
                    Arc::new(|x| 2.0 - 2.0 * x),
                    Arc::new(|_| -2.0),
                    Monotonicity::Decreasing,
                ),
            ],
            vec![],
            Some(0.5),
        ),
        StandardMap::Rotation(theta) => {
            assert!((0.0..1.0).contains(&theta), "rotation angle must be in [0,1)");
            if theta == 0.0 {
                return MapModel::new(
                    "identity",
                    vec![Branch::new(
                        0.0,
                        1.0,
                        Arc::new(|x| x),
                        Arc::new(|_| 1.0),
                        Monotonicity::Increasing,
                    )],
                    vec![],
                    None,
                );
            }
            MapModel::new(
                format!("rotation({theta})"),
                vec![
                    Branch::new(
                        0.0,
                        1.0 - theta,
                        Arc::new(move |x| x + theta),
                        Arc::new(|_| 1.0),
                        Monotonicity::Increasing,
                    ),
                    Branch::new(
                        1.0 - theta,
                        1.0,
                        Arc::new(move |x| x + theta - 1.0),
                        Arc::new(|_| 1.0),
                        Monotonicity::Increasing,
                    ),
                ],
                vec![],
                None,
            )
        }
    }
}

/// The two-branch interval map modeling the Belousov–Zhabotinsky reaction.
///
/// `T(x) = (a + (x - 1/8)^(1/3)) e^(-x) + b` on `[0, 0.3)` and
/// `T(x) = c (10 x e^(-10x/3))^19 + b` on `[0.3, 1]`, with `a` chosen so that
/// `T'` is continuous at `0.3` (`T'(0.3) = 0`) and `c` so that `T` is
/// continuous there. The cube root has infinite slope at `x = 1/8`, so both
/// `1/8` and `0.3` are tagged as critical points.
pub fn make_bz_map() -> MapModel {
    let cbrt_7_5 = (7.0f64 / 5.0).cbrt();
    let a = 19.0 / 42.0 * cbrt_7_5;
    let c = 20.0 / (3.0f64.powi(20) * 7.0) * cbrt_7_5 * (18.7f64).exp();
    let b = 0.02328852830307032;

    let branch1 = Branch::new(
        0.0,
        0.3,
        Arc::new(move |x: f64| (a + (x - 0.125).cbrt()) * (-x).exp() + b),
        Arc::new(move |x: f64| {
            let u = x - 0.125;
            let cb = u.cbrt();
            (-x).exp() * (1.0 / (3.0 * cb * cb) - (a + cb))
        }),
        Monotonicity::Increasing,
    );
    let branch2 = Branch::new(
        0.3,
        1.0,
        Arc::new(move |x: f64| {
            let base = 10.0 * x * (-10.0 * x / 3.0).exp();
            c * base.powi(19) + b
        }),
        Arc::new(move |x: f64| {
            let base = 10.0 * x * (-10.0 * x / 3.0).exp();
            190.0 * c * base.powi(18) * (-10.0 * x / 3.0).exp() * (1.0 - 10.0 * x / 3.0)
        }),
        Monotonicity::Decreasing,
    );
    MapModel::new("bz", vec![branch1, branch2], vec![0.125, 0.3], Some(0.3))
}

/// Piecewise-linear perturbation profile `S` with `S(0) = S(1) = 0`.
///
/// The node form makes the Lipschitz constant and the support exactly
/// computable. Admissibility (`Lip(S) <= 1`) is *not* enforced at
/// construction; [`validate_perturbation`] reports it and
/// [`perturb_map`] rejects combinations with `δ·Lip(S) >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationS {
    nodes: Vec<(f64, f64)>,
}

impl PerturbationS {
    pub fn new(nodes: Vec<(f64, f64)>) -> Result<PerturbationS> {
        if nodes.len() < 2 {
            return Err(EngineError::invalid_config(
                "perturbation.nodes",
                "need at least the two endpoint nodes",
            ));
        }
        for w in nodes.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(EngineError::invalid_config(
                    "perturbation.nodes",
                    format!("node positions must be strictly increasing, got {} then {}", w[0].0, w[1].0),
                ));
            }
        }
        let first = nodes.first().unwrap();
        let last = nodes.last().unwrap();
        if first.0 != 0.0 || first.1 != 0.0 || last.0 != 1.0 || last.1 != 0.0 {
            return Err(EngineError::invalid_config(
                "perturbation.nodes",
                "S must satisfy S(0) = 0 and S(1) = 0 exactly",
            ));
        }
        Ok(PerturbationS { nodes })
    }

    pub fn zero() -> PerturbationS {
        PerturbationS {
            nodes: vec![(0.0, 0.0), (1.0, 0.0)],
        }
    }

    /// Tent bump of the given height supported on `[center - halfwidth,
    /// center + halfwidth]`.
    pub fn bump(center: f64, halfwidth: f64, height: f64) -> Result<PerturbationS> {
        let lo = center - halfwidth;
        let hi = center + halfwidth;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || halfwidth <= 0.0 {
            return Err(EngineError::invalid_config(
                "perturbation.bump",
                format!("bump [{lo}, {hi}] must lie inside [0,1]"),
            ));
        }
        let mut nodes = Vec::new();
        if lo > 0.0 {
            nodes.push((0.0, 0.0));
        }
        nodes.push((lo, 0.0));
        nodes.push((center, height));
        nodes.push((hi, 0.0));
        if hi < 1.0 {
            nodes.push((1.0, 0.0));
        }
        PerturbationS::new(nodes)
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn eval(&self, x: f64) -> f64 {
        let nodes = &self.nodes;
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 0.0;
        }
        let idx = nodes.partition_point(|(t, _)| *t <= x);
        // nodes[idx-1].0 <= x < nodes[idx].0
        let (t0, s0) = nodes[idx - 1];
        let (t1, s1) = nodes[idx];
        s0 + (s1 - s0) * (x - t0) / (t1 - t0)
    }

    /// Right-continuous slope of the piecewise-linear profile at `x`.
    pub fn slope_at(&self, x: f64) -> f64 {
        let nodes = &self.nodes;
        let idx = nodes
            .partition_point(|(t, _)| *t <= x)
            .clamp(1, nodes.len() - 1);
        let (t0, s0) = nodes[idx - 1];
        let (t1, s1) = nodes[idx];
        (s1 - s0) / (t1 - t0)
    }

    /// The exact Lipschitz constant: the largest absolute node slope.
    pub fn lipschitz(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_abs(&self) -> f64 {
        self.nodes.iter().map(|(_, s)| s.abs()).fold(0.0, f64::max)
    }

    /// Closure of `{S != 0}` as a union of maximal closed intervals.
    pub fn support(&self) -> Vec<(f64, f64)> {
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        for w in self.nodes.windows(2) {
            let segment_zero = w[0].1 == 0.0 && w[1].1 == 0.0;
            if !segment_zero {
                match intervals.last_mut() {
                    Some(last) if last.1 >= w[0].0 => last.1 = w[1].0,
                    _ => intervals.push((w[0].0, w[1].0)),
                }
            }
        }
        intervals
    }
}

/// Diagnostics for a perturbation profile.
#[derive(Debug, Clone)]
pub struct PerturbationDiagnostics {
    pub lipschitz: f64,
    pub endpoint_start: f64,
    pub endpoint_end: f64,
    pub support: Vec<(f64, f64)>,
    pub valid: bool,
    pub violations: Vec<String>,
}

/// Report the Lipschitz constant, endpoint values, and support of `S`, and
/// flag violations of the admissibility constraints (`Lip(S) <= 1`,
/// `S(0) = S(1) = 0`).
pub fn validate_perturbation(s: &PerturbationS) -> PerturbationDiagnostics {
    let lipschitz = s.lipschitz();
    let endpoint_start = s.nodes().first().unwrap().1;
    let endpoint_end = s.nodes().last().unwrap().1;
    let mut violations = Vec::new();
    if lipschitz > 1.0 {
        violations.push(format!("Lipschitz constant {lipschitz} exceeds 1"));
    }
    if endpoint_start != 0.0 {
        violations.push(format!("S(0) = {endpoint_start} != 0"));
    }
    if endpoint_end != 0.0 {
        violations.push(format!("S(1) = {endpoint_end} != 0"));
    }
    PerturbationDiagnostics {
        lipschitz,
        endpoint_start,
        endpoint_end,
        support: s.support(),
        valid: violations.is_empty(),
        violations,
    }
}

/// Compose `T` with `D_δ = 1 + δS`: the perturbed map is
/// `x ↦ T(x) + δ·S(T(x))` with the chain-rule derivative.
///
/// Errors with [`EngineError::NotBijective`] when `|δ|·Lip(S) >= 1`.
pub fn perturb_map(map: &MapModel, s: &PerturbationS, delta: f64) -> Result<MapModel> {
    let product = delta.abs() * s.lipschitz();
    if product >= 1.0 {
        return Err(EngineError::NotBijective { product });
    }
    let branches = map
        .branches()
        .iter()
        .map(|b| {
            let base = b.eval.clone();
            let base_for_deriv = b.eval.clone();
            let base_d = b.deriv.clone();
            let s_eval = s.clone();
            let s_slope = s.clone();
            Branch::new(
                b.lo,
                b.hi,
                Arc::new(move |x| {
                    let y = base(x);
                    y + delta * s_eval.eval(y)
                }),
                Arc::new(move |x| {
                    let y = base_for_deriv(x);
                    base_d(x) * (1.0 + delta * s_slope.slope_at(y))
                }),
                b.monotonicity,
            )
        })
        .collect();
    Ok(MapModel::new(
        format!("{}+{}*S", map.label(), delta),
        branches,
        map.critical_points().to_vec(),
        map.maximizer(),
    ))
}

/// Step density with support in `[-1,1]`, plus optional atoms (used only by
/// derivative kernels). Probability kernels have nonnegative density, no
/// atoms, and unit mass.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseKernel {
    label: String,
    /// `m+1` sorted breakpoints; piece `i` covers `[b_i, b_{i+1})`.
    breakpoints: Vec<f64>,
    /// `m` piece values.
    values: Vec<f64>,
    /// Sorted (position, weight) atoms.
    atoms: Vec<(f64, f64)>,
    /// Kernel CDF at breakpoints (step part plus atoms at earlier positions).
    cdf_at_breaks: Vec<f64>,
    /// Integral of the CDF at breakpoints.
    cdf_integral_at_breaks: Vec<f64>,
}

impl NoiseKernel {
    pub fn new(
        label: impl Into<String>,
        breakpoints: Vec<f64>,
        values: Vec<f64>,
        mut atoms: Vec<(f64, f64)>,
    ) -> Result<NoiseKernel> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(EngineError::invalid_config(
                "kernel",
                "need m+1 breakpoints for m piece values",
            ));
        }
        for w in breakpoints.windows(2) {
            if !(w[0] < w[1]) {
                return Err(EngineError::invalid_config(
                    "kernel.breakpoints",
                    "breakpoints must be strictly increasing",
                ));
            }
        }
        let lo = breakpoints[0];
        let hi = *breakpoints.last().unwrap();
        if lo < -1.0 || hi > 1.0 {
            return Err(EngineError::invalid_config(
                "kernel.breakpoints",
                format!("support [{lo}, {hi}] must lie inside [-1, 1]"),
            ));
        }
        for (p, _) in &atoms {
            if *p < -1.0 || *p > 1.0 {
                return Err(EngineError::invalid_config(
                    "kernel.atoms",
                    format!("atom position {p} outside [-1,1]"),
                ));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut kernel = NoiseKernel {
            label: label.into(),
            breakpoints,
            values,
            atoms,
            cdf_at_breaks: Vec::new(),
            cdf_integral_at_breaks: Vec::new(),
        };
        kernel.rebuild_prefix_tables();
        Ok(kernel)
    }

    fn rebuild_prefix_tables(&mut self) {
        let m = self.values.len();
        let mut cdf = Vec::with_capacity(m + 1);
        let mut cdf_int = Vec::with_capacity(m + 1);
        cdf.push(self.atom_mass_upto(self.breakpoints[0]));
        cdf_int.push(0.0);
        for i in 0..m {
            let width = self.breakpoints[i + 1] - self.breakpoints[i];
            let k_lo = cdf[i];
            // Step contribution over the piece plus atoms interior to it.
            let mut k_hi = k_lo + self.values[i] * width;
            // ∫ K over the piece: start with the atomless ramp.
            let mut g = k_lo * width + 0.5 * self.values[i] * width * width;
            for (p, w) in &self.atoms {
                if *p > self.breakpoints[i] && *p <= self.breakpoints[i + 1] {
                    k_hi += w;
                    g += w * (self.breakpoints[i + 1] - p);
                }
            }
            cdf.push(k_hi);
            cdf_int.push(cdf_int[i] + g);
        }
        self.cdf_at_breaks = cdf;
        self.cdf_integral_at_breaks = cdf_int;
    }

    fn atom_mass_upto(&self, t: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|(p, _)| *p <= t)
            .map(|(_, w)| w)
            .sum()
    }

    /// Uniform noise of radius `a`: density `1/a` on `[-a/2, a/2]`.
    pub fn uniform(radius: f64) -> Result<NoiseKernel> {
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(EngineError::BadRadius { radius, max: 1.0 });
        }
        NoiseKernel::new(
            format!("uniform({radius})"),
            vec![-radius / 2.0, radius / 2.0],
            vec![1.0 / radius],
            vec![],
        )
    }

    /// Derivative of the uniform family with respect to the radius:
    /// `-a⁻²·1_[-a/2,a/2] + (a⁻¹/2)·δ_{-a/2} + (a⁻¹/2)·δ_{a/2}`; zero mass.
    pub fn uniform_derivative(radius: f64) -> Result<NoiseKernel> {
        if !(radius > 0.0 && radius < 1.0) {
            return Err(EngineError::BadRadius { radius, max: 1.0 });
        }
        let inv = 1.0 / radius;
        NoiseKernel::new(
            format!("uniform_derivative({radius})"),
            vec![-radius / 2.0, radius / 2.0],
            vec![-inv * inv],
            vec![(-radius / 2.0, inv / 2.0), (radius / 2.0, inv / 2.0)],
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn piece_values(&self) -> &[f64] {
        &self.values
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn support(&self) -> (f64, f64) {
        let lo = self
            .atoms
            .first()
            .map_or(self.breakpoints[0], |(p, _)| p.min(self.breakpoints[0]));
        let hi = self
            .atoms
            .last()
            .map_or(*self.breakpoints.last().unwrap(), |(p, _)| {
                p.max(*self.breakpoints.last().unwrap())
            });
        (lo, hi)
    }

    pub fn mass(&self) -> f64 {
        *self.cdf_at_breaks.last().unwrap()
    }

    pub fn l1_norm(&self) -> f64 {
        let step: f64 = self
            .values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| v.abs() * (w[1] - w[0]))
            .sum();
        step + self.atoms.iter().map(|(_, w)| w.abs()).sum::<f64>()
    }

    /// Variation of the step density extended by zero to the real line:
    /// boundary jumps plus interior jumps. Atoms are excluded.
    pub fn extended_variation(&self) -> f64 {
        let mut var = self.values[0].abs() + self.values.last().unwrap().abs();
        var += self
            .values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .sum::<f64>();
        var
    }

    pub fn is_probability(&self, tol: f64) -> bool {
        self.atoms.is_empty()
            && self.values.iter().all(|v| *v >= 0.0)
            && (self.mass() - 1.0).abs() <= tol
    }

    /// Kernel CDF `K(t) = ρ((-∞, t])`, right-continuous at atoms.
    pub fn cdf(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        if t < bp[0] {
            return self.atom_mass_upto(t);
        }
        if t >= *bp.last().unwrap() {
            return self.mass();
        }
        let i = bp.partition_point(|b| *b <= t) - 1;
        let mut k = self.cdf_at_breaks[i] + self.values[i] * (t - bp[i]);
        for (p, w) in &self.atoms {
            if *p > bp[i] && *p <= t {
                k += w;
            }
        }
        k
    }

    /// `G(t) = ∫_{-∞}^t K(s) ds` (zero below the support). Piecewise
    /// quadratic; this is what makes cell-averaged convolution exact.
    pub fn cdf_integral(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        if t <= bp[0] {
            // Only atoms below the step support could contribute, and atom
            // positions are sorted; accumulate their ramps.
            return self
                .atoms
                .iter()
                .filter(|(p, _)| *p < t)
                .map(|(p, w)| w * (t - p))
                .sum();
        }
        let last = *bp.last().unwrap();
        if t >= last {
            let m = bp.len() - 1;
            return self.cdf_integral_at_breaks[m] + self.mass() * (t - last);
        }
        let i = bp.partition_point(|b| *b <= t) - 1;
        let dt = t - bp[i];
        let mut g = self.cdf_integral_at_breaks[i]
            + self.cdf_at_breaks[i] * dt
            + 0.5 * self.values[i] * dt * dt;
        for (p, w) in &self.atoms {
            if *p > bp[i] && *p <= t {
                g += w * (t - p);
            }
        }
        g
    }

    /// Inverse-CDF sample for probability kernels: exact on the piecewise
    /// linear CDF, no rejection.
    pub fn sample(&self, u: f64) -> f64 {
        debug_assert!(self.atoms.is_empty(), "sampling needs a probability kernel");
        let target = u.clamp(0.0, 1.0) * self.mass();
        let cdf = &self.cdf_at_breaks;
        let mut i = cdf.partition_point(|c| *c <= target);
        if i == 0 {
            return self.breakpoints[0];
        }
        if i > self.values.len() {
            i = self.values.len();
        }
        let i = i - 1;
        if self.values[i] <= 0.0 {
            return self.breakpoints[i + 1];
        }
        self.breakpoints[i] + (target - cdf[i]) / self.values[i]
    }
}

/// One of the three perturbation families of the engine. The magnitude
/// (`δ` or `ξ`) is supplied per evaluation, not stored.
#[derive(Debug, Clone)]
pub enum PerturbationSpec {
    /// Deterministic perturbation of the map by `D_δ = 1 + δS`.
    Map(PerturbationS),
    /// Change of the uniform-noise radius around `base_radius`.
    NoiseRadius { base_radius: f64 },
    /// Random mixture `(1-δ)·L₀ + δ·L_{T₂}` with a second, noiseless map.
    Mixture { second_map: MapModel },
}
