//! Experiment configuration, read from TOML.
//!
//! Every section has defaults, so an empty file is a valid configuration:
//! the reference material in two dimensions on the unit disk with a
//! concentric phase-1 core of fraction 0.1.
//!
//! ```toml
//! seed = 7
//! output = "out"
//!
//! [material]
//! d = 2
//! mu = 1.0
//! potential = { kind = "bi_quadratic", kappa0 = 1.0, theta_p = 1.0, f0 = 0.1 }
//!
//! [loading]
//! omega = 0.1        # sets Tr H0 by the lever rule, or give `entries`
//! shear = 0.0
//!
//! [domain]
//! shape = "unit_disk" # unit_ball | square | rectangle
//!
//! [construction]
//! kind = "concentric_ball" # hashin | ball_mask | affine | laminate
//! omega = 0.1
//! phase1_inside = true
//!
//! [resolution]
//! ladder = [64, 128, 256]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twowell_core::energy::{common_tangent, CommonTangent, MaterialParams, Potential, Tabulated};
use twowell_core::fields::GridDomain;
use twowell_core::SquareMatrix;

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output: PathBuf,
    pub material: MaterialSpec,
    pub loading: LoadingSpec,
    pub domain: DomainSpec,
    pub construction: ConstructionSpec,
    pub resolution: ResolutionSpec,
    pub tolerances: ToleranceSpec,
    pub envelope: EnvelopeSpec,
    pub square: SquareSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 7,
            output: PathBuf::from("out"),
            material: MaterialSpec::default(),
            loading: LoadingSpec::default(),
            domain: DomainSpec::default(),
            construction: ConstructionSpec::default(),
            resolution: ResolutionSpec::default(),
            tolerances: ToleranceSpec::default(),
            envelope: EnvelopeSpec::default(),
            square: SquareSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSpec {
    pub d: usize,
    pub mu: f64,
    pub potential: PotentialSpec,
}

impl Default for MaterialSpec {
    fn default() -> Self {
        MaterialSpec {
            d: 2,
            mu: 1.0,
            potential: PotentialSpec::BiQuadratic {
                kappa0: 1.0,
                theta_p: 1.0,
                f0: 0.1,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    BiQuadratic {
        kappa0: f64,
        theta_p: f64,
        f0: f64,
    },
    /// Monotone-cubic interpolation through the samples.
    Tabulated {
        thetas: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadingSpec {
    /// Row-major `H0`; takes precedence over `omega`.
    pub entries: Option<Vec<f64>>,
    /// Phase-1 fraction; sets `Tr H0 = ω θ1 + (1 − ω) θ2`.
    pub omega: Option<f64>,
    /// Added to `H0[0][1]` when `H0` is built from `omega`.
    pub shear: f64,
}

impl Default for LoadingSpec {
    fn default() -> Self {
        LoadingSpec {
            entries: None,
            omega: Some(0.1),
            shear: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSpec {
    pub shape: ShapeKind,
    /// Half side of the square.
    pub half_side: f64,
    /// Half widths of the rectangle, one per axis.
    pub half_widths: Vec<f64>,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec {
            shape: ShapeKind::UnitDisk,
            half_side: 1.0,
            half_widths: vec![1.0, 0.5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    UnitDisk,
    UnitBall,
    Square,
    Rectangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstructionSpec {
    ConcentricBall {
        omega: f64,
        #[serde(default = "yes")]
        phase1_inside: bool,
    },
    Hashin {
        omega: f64,
        min_radius: f64,
        #[serde(default = "coverage")]
        target_coverage: f64,
    },
    /// Phase 1 on the cells whose centre lies in one ball.
    BallMask {
        center: Vec<f64>,
        radius: f64,
    },
    Affine,
    Laminate {
        normal: Vec<f64>,
    },
}

fn yes() -> bool {
    true
}

fn coverage() -> f64 {
    0.99
}

impl Default for ConstructionSpec {
    fn default() -> Self {
        ConstructionSpec::ConcentricBall {
            omega: 0.1,
            phase1_inside: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolutionSpec {
    /// Cells per side, strictly increasing; the last entry is the finest.
    pub ladder: Vec<usize>,
}

impl Default for ResolutionSpec {
    fn default() -> Self {
        ResolutionSpec {
            ladder: vec![64, 128, 256],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Multiplies every threshold below and every `verify` threshold.
    pub scale: f64,
    pub algebraic: f64,
    pub envelope: f64,
    pub certificate: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            scale: 1.0,
            algebraic: 1e-10,
            envelope: 1e-8,
            certificate: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeSpec {
    pub theta_min: f64,
    pub theta_max: f64,
    pub samples: usize,
}

impl Default for EnvelopeSpec {
    fn default() -> Self {
        EnvelopeSpec {
            theta_min: -0.5,
            theta_max: 1.5,
            samples: 401,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SquareSpec {
    pub omega: f64,
    /// `center` or `boundary`; the latter solves with `1 − ω`.
    pub morphology: String,
    pub orders: Vec<usize>,
    pub bases: Vec<usize>,
    pub pin_slope: bool,
    /// `(K, n)` of the curve written to `curve.csv`.
    pub report_order: usize,
    pub report_basis: usize,
    pub z_min: f64,
    pub z_max: f64,
    pub z_points: usize,
    pub outline_samples: usize,
}

impl Default for SquareSpec {
    fn default() -> Self {
        SquareSpec {
            omega: 0.3,
            morphology: "center".into(),
            orders: vec![8, 16, 32, 64],
            bases: vec![4, 8, 16],
            pin_slope: false,
            report_order: 32,
            report_basis: 8,
            z_min: 10.0,
            z_max: 40.0,
            z_points: 31,
            outline_samples: 200,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
    pub tolerance: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// `--resolution` replaces the ladder by a single entry.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), LabError> {
        if let Some(p) = &o.output {
            self.output = p.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.resolution {
            self.resolution.ladder = vec![n];
        }
        if let Some(t) = o.tolerance {
            self.tolerances.scale = t;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::Config(m));
        let ladder = &self.resolution.ladder;
        if ladder.is_empty() {
            return bad("resolution.ladder is empty".into());
        }
        if ladder.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "resolution.ladder {ladder:?} is not strictly increasing"
            ));
        }
        if ladder[0] < 8 {
            return bad("resolution.ladder entries must be at least 8".into());
        }
        let t = &self.tolerances;
        if !(t.scale > 0.0 && t.scale.is_finite()) {
            return bad(format!("tolerance scale {} must be positive", t.scale));
        }
        let e = &self.envelope;
        if !(e.theta_min < e.theta_max) || e.samples < 2 {
            return bad("envelope needs theta_min < theta_max and at least 2 samples".into());
        }
        let s = &self.square;
        if !matches!(s.morphology.as_str(), "center" | "boundary") {
            return bad(format!(
                "square.morphology must be center or boundary, got {}",
                s.morphology
            ));
        }
        if s.orders.is_empty()
            || s.bases.is_empty()
            || s.z_points < 2
            || !(s.z_min > 0.0 && s.z_min < s.z_max)
        {
            return bad("square needs orders, bases, z_points >= 2 and 0 < z_min < z_max".into());
        }
        if s.report_basis == 0 || s.report_order < s.report_basis {
            return bad("square.report_order must be >= report_basis >= 1".into());
        }
        if s.outline_samples < 2 {
            return bad("square.outline_samples must be at least 2".into());
        }
        self.material()?;
        if let Some(entries) = &self.loading.entries {
            let d = self.material.d;
            if entries.len() != d * d {
                return bad(format!(
                    "loading.entries needs {} values for d = {d}",
                    d * d
                ));
            }
        } else if self.loading.omega.is_none() {
            return bad("loading needs entries or omega".into());
        }
        match (&self.domain.shape, self.material.d) {
            (ShapeKind::UnitDisk, 2) | (ShapeKind::UnitBall, 3) | (ShapeKind::Square, _) => {}
            (ShapeKind::Rectangle, d) if self.domain.half_widths.len() == d => {}
            (ShapeKind::Rectangle, d) => return bad(format!("rectangle needs {d} half widths")),
            (shape, d) => return bad(format!("{shape:?} does not exist in d = {d}")),
        }
        Ok(())
    }

    pub fn material(&self) -> Result<MaterialParams, LabError> {
        let m = &self.material;
        let p = match &m.potential {
            PotentialSpec::BiQuadratic {
                kappa0,
                theta_p,
                f0,
            } => MaterialParams::bi_quadratic(m.d, m.mu, *kappa0, *theta_p, *f0),
            PotentialSpec::Tabulated { thetas, values } => {
                Tabulated::new(thetas.clone(), values.clone())
                    .and_then(|t| MaterialParams::new(m.d, m.mu, Potential::Tabulated(t)))
            }
        };
        p.map_err(|e| LabError::Config(format!("material: {e}")))
    }

    pub fn tangent(&self) -> Result<(MaterialParams, CommonTangent), LabError> {
        let p = self.material()?;
        let t = common_tangent(&p)?;
        Ok((p, t))
    }

    pub fn h0(&self, tangent: &CommonTangent) -> Result<SquareMatrix, LabError> {
        let d = self.material.d;
        if let Some(entries) = &self.loading.entries {
            return Ok(SquareMatrix::from_row_slice(d, entries)?);
        }
        let omega = self.loading.omega.unwrap_or(0.5);
        let b = tangent.require()?;
        let tr = omega * b.theta1 + (1.0 - omega) * b.theta2;
        let mut h = SquareMatrix::scaled_identity(d, tr / d as f64);
        h.set(0, 1, h.get(0, 1) + self.loading.shear);
        Ok(h)
    }

    pub fn grid(&self, n: usize) -> Result<GridDomain, LabError> {
        let d = self.material.d;
        let g = match self.domain.shape {
            ShapeKind::UnitDisk => GridDomain::unit_disk(n),
            ShapeKind::UnitBall => GridDomain::unit_ball(n),
            ShapeKind::Square if d == 2 => GridDomain::square(n, self.domain.half_side),
            ShapeKind::Square => GridDomain::rectangle(n, &vec![self.domain.half_side; d]),
            ShapeKind::Rectangle => GridDomain::rectangle(n, &self.domain.half_widths),
        };
        Ok(g?)
    }

    /// Tolerances scaled by `tolerances.scale`.
    pub fn scaled(&self) -> ToleranceSpec {
        let t = &self.tolerances;
        ToleranceSpec {
            scale: t.scale,
            algebraic: t.algebraic * t.scale,
            envelope: t.envelope * t.scale,
            certificate: t.certificate * t.scale,
        }
    }

    /// Canonical JSON of the resolved configuration without `output`, so
    /// the same experiment written to two places carries the same hash.
    pub fn canonical(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serialises");
        v.as_object_mut()
            .expect("config is an object")
            .remove("output");
        serde_json::to_string(&v).expect("config serialises")
    }
}
