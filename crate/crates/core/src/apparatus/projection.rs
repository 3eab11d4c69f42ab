use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::filter::ReferenceEnvelope;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::signal_prep::TemporalEnvelope;

/// Values this far below zero are treated as round-off and clamped.
pub(crate) const NEGATIVE_TOLERANCE: f64 = 1e-14;

/// Output polarization of the projection measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    /// (H + V)/√2
    D,
    /// (H − V)/√2
    A,
    /// (H + iV)/√2
    R,
    /// (H − iV)/√2
    L,
}

impl Polarization {
    pub const ALL: [Polarization; 4] = [Polarization::D, Polarization::A, Polarization::R, Polarization::L];

    /// Factor `c` such that the detected amplitude is `(ψ_env + c·f) / 2`
    /// for V-branch signal ψ_env and H-branch reference f.
    ///
    /// With `⟨φ| = (⟨H| + β*⟨V|)/√2` the amplitude is `(f + β*ψ)/2`, whose modulus
    /// equals `|ψ + β f|/2`. So D → 1, A → −1, R → i, L → −i.
    pub fn reference_factor(self) -> Complex64 {
        match self {
            Polarization::D => Complex64::new(1.0, 0.0),
            Polarization::A => Complex64::new(-1.0, 0.0),
            Polarization::R => Complex64::new(0.0, 1.0),
            Polarization::L => Complex64::new(0.0, -1.0),
        }
    }

    /// Partner in the same measurement basis.
    pub fn complement(self) -> Polarization {
        match self {
            Polarization::D => Polarization::A,
            Polarization::A => Polarization::D,
            Polarization::R => Polarization::L,
            Polarization::L => Polarization::R,
        }
    }

    pub fn code(self) -> u64 {
        match self {
            Polarization::D => 0,
            Polarization::A => 1,
            Polarization::R => 2,
            Polarization::L => 3,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Polarization::D => "D",
            Polarization::A => "A",
            Polarization::R => "R",
            Polarization::L => "L",
        };
        f.write_str(s)
    }
}

impl FromStr for Polarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "D" | "d" => Ok(Polarization::D),
            "A" | "a" => Ok(Polarization::A),
            "R" | "r" => Ok(Polarization::R),
            "L" | "l" => Ok(Polarization::L),
            other => Err(Error::Data(format!("unknown polarization `{other}`"))),
        }
    }
}

/// One value per polarization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationSet<T> {
    pub d: T,
    pub a: T,
    pub r: T,
    pub l: T,
}

impl<T> PolarizationSet<T> {
    pub fn from_fn(mut f: impl FnMut(Polarization) -> T) -> Self {
        PolarizationSet {
            d: f(Polarization::D),
            a: f(Polarization::A),
            r: f(Polarization::R),
            l: f(Polarization::L),
        }
    }

    pub fn try_from_fn<E>(
        mut f: impl FnMut(Polarization) -> std::result::Result<T, E>,
    ) -> std::result::Result<Self, E> {
        Ok(PolarizationSet {
            d: f(Polarization::D)?,
            a: f(Polarization::A)?,
            r: f(Polarization::R)?,
            l: f(Polarization::L)?,
        })
    }

    pub fn map<U>(&self, mut f: impl FnMut(Polarization, &T) -> U) -> PolarizationSet<U> {
        PolarizationSet::from_fn(|p| f(p, &self[p]))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Polarization, &T)> {
        Polarization::ALL.into_iter().map(move |p| (p, &self[p]))
    }
}

impl<T> Index<Polarization> for PolarizationSet<T> {
    type Output = T;

    fn index(&self, p: Polarization) -> &T {
        match p {
            Polarization::D => &self.d,
            Polarization::A => &self.a,
            Polarization::R => &self.r,
            Polarization::L => &self.l,
        }
    }
}

impl<T> IndexMut<Polarization> for PolarizationSet<T> {
    fn index_mut(&mut self, p: Polarization) -> &mut T {
        match p {
            Polarization::D => &mut self.d,
            Polarization::A => &mut self.a,
            Polarization::R => &mut self.r,
            Polarization::L => &mut self.l,
        }
    }
}

/// Probability density P(t, φ) per unit time for one polarization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionDistribution {
    grid: TimeGrid,
    pol: Polarization,
    values: Vec<f64>,
}

impl ProjectionDistribution {
    /// Validates length and sign; values within 1e-14 below zero are clamped.
    pub fn new(grid: TimeGrid, pol: Polarization, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        for v in values.iter_mut() {
            if !v.is_finite() || *v < -NEGATIVE_TOLERANCE {
                return Err(Error::Data(format!("invalid probability density {v}")));
            }
            *v = v.max(0.0);
        }
        Ok(ProjectionDistribution { grid, pol, values })
    }

    pub(crate) fn from_parts(grid: TimeGrid, pol: Polarization, values: Vec<f64>) -> Self {
        ProjectionDistribution { grid, pol, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn pol(&self) -> Polarization {
        self.pol
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ P dt`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        ProjectionDistribution {
            grid: self.grid,
            pol: self.pol,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Samples at `indices` onto `grid` (which must have one sample per index).
    pub(crate) fn select(&self, grid: TimeGrid, indices: &[usize]) -> Self {
        ProjectionDistribution {
            grid,
            pol: self.pol,
            values: indices.iter().map(|&j| self.values[j]).collect(),
        }
    }
}

/// Joint normalization `N = Σ (|ψ|² + |f|²) dt`, so that each complementary
/// pair integrates to one.
fn joint_norm(signal: &TemporalEnvelope, reference: &ReferenceEnvelope) -> f64 {
    signal
        .amplitudes()
        .iter()
        .zip(reference.amplitudes())
        .map(|(s, f)| s.norm_sqr() + f.norm_sqr())
        .sum::<f64>()
        * signal.grid().dt()
}

fn check_grids(signal: &TemporalEnvelope, reference: &ReferenceEnvelope) -> Result<()> {
    if signal.grid().matches(reference.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn distribution(
    signal: &TemporalEnvelope,
    reference: &ReferenceEnvelope,
    pol: Polarization,
    n: f64,
) -> ProjectionDistribution {
    let c = pol.reference_factor();
    let values = signal
        .amplitudes()
        .iter()
        .zip(reference.amplitudes())
        .map(|(&s, &f)| (s + c * f).norm_sqr() / (2.0 * n))
        .collect();
    ProjectionDistribution::from_parts(*signal.grid(), pol, values)
}

/// `P(t, φ) = |ψ_env(t) + c_φ f(t)|² / (2N)`.
pub fn projection_probabilities(
    signal: &TemporalEnvelope,
    reference: &ReferenceEnvelope,
    pol: Polarization,
) -> Result<ProjectionDistribution> {
    check_grids(signal, reference)?;
    let n = joint_norm(signal, reference);
    if !(n > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok(distribution(signal, reference, pol, n))
}

/// All four projections, sharing one normalization pass.
pub fn projection_set(
    signal: &TemporalEnvelope,
    reference: &ReferenceEnvelope,
) -> Result<PolarizationSet<ProjectionDistribution>> {
    check_grids(signal, reference)?;
    let n = joint_norm(signal, reference);
    if !(n > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok(PolarizationSet::from_fn(|p| distribution(signal, reference, p, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apparatus::filter::{filtered_reference, FilterSpec};
    use crate::signal_prep::{slit_spectrum, spectrum_to_temporal, SlitSpec};

    fn slit_setup(s_mm: f64) -> (TemporalEnvelope, ReferenceEnvelope) {
        let fg = TimeGrid::new(4096, 0.01, 0.0).unwrap().conjugate();
        let spec = slit_spectrum(&SlitSpec::new(2.0, s_mm, 2.41).unwrap(), &fg).unwrap();
        let r = filtered_reference(&spec, &FilterSpec::new(1.08, 0.0).unwrap()).unwrap();
        (spectrum_to_temporal(&spec), r)
    }

    #[test]
    fn zero_reference_gives_half_intensity() {
        let (env, _) = slit_setup(0.3);
        let r = ReferenceEnvelope::zero(*env.grid());
        let set = projection_set(&env, &r).unwrap();
        for (_, p) in set.iter() {
            for (v, a) in p.values().iter().zip(env.amplitudes()) {
                assert!((v - a.norm_sqr() / 2.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn identical_reference_cancels_antidiagonal() {
        let (env, _) = slit_setup(0.0);
        let r = ReferenceEnvelope::new(*env.grid(), env.amplitudes().to_vec()).unwrap();
        let set = projection_set(&env, &r).unwrap();
        let n = 2.0 * env.norm_sq();
        for ((d, a), psi) in set.d.values().iter().zip(set.a.values()).zip(env.amplitudes()) {
            assert!(*a < 1e-30);
            assert!((d - 2.0 * psi.norm_sqr() / n).abs() < 1e-14);
        }
    }

    #[test]
    fn complementarity_and_pair_mass() {
        let (env, r) = slit_setup(0.8);
        let set = projection_set(&env, &r).unwrap();
        let dt = env.grid().dt();
        for j in 0..env.len() {
            let da = set.d.values()[j] + set.a.values()[j];
            let rl = set.r.values()[j] + set.l.values()[j];
            assert!((da - rl).abs() < 1e-10);
        }
        let pair: f64 = set
            .d
            .values()
            .iter()
            .zip(set.a.values())
            .map(|(a, b)| a + b)
            .sum::<f64>()
            * dt;
        assert!((pair - 1.0).abs() < 1e-9);
    }

    /// D−A and R−L carry Re and Im of f*ψ with the same scale.
    #[test]
    fn differences_give_real_and_imaginary_parts() {
        let (env, r) = slit_setup(0.5);
        let set = projection_set(&env, &r).unwrap();
        let n: f64 = env.norm_sq() + r.amplitudes().iter().map(|f| f.norm_sqr()).sum::<f64>() * env.grid().dt();
        for j in 0..env.len() {
            let z = r.amplitudes()[j].conj() * env.amplitudes()[j] * 2.0 / n;
            assert!((set.d.values()[j] - set.a.values()[j] - z.re).abs() < 1e-12);
            assert!((set.r.values()[j] - set.l.values()[j] - z.im).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_mismatch() {
        let (env, _) = slit_setup(0.0);
        let other = ReferenceEnvelope::zero(TimeGrid::new(4096, 0.02, 0.0).unwrap());
        assert!(matches!(
            projection_probabilities(&env, &other, Polarization::D),
            Err(Error::GridMismatch)
        ));
    }

    #[test]
    fn polarization_text_round_trip() {
        for p in Polarization::ALL {
            assert_eq!(p.to_string().parse::<Polarization>().unwrap(), p);
            assert_eq!(p.complement().complement(), p);
        }
        assert!("X".parse::<Polarization>().is_err());
    }

    #[test]
    fn constructor_clamps_roundoff_only() {
        let g = TimeGrid::new(4, 1.0, 0.0).unwrap();
        let p = ProjectionDistribution::new(g, Polarization::D, vec![0.1, -1e-15, 0.0, 0.2]).unwrap();
        assert_eq!(p.values()[1], 0.0);
        assert!(ProjectionDistribution::new(g, Polarization::D, vec![0.1, -1e-3, 0.0, 0.2]).is_err());
    }
}
