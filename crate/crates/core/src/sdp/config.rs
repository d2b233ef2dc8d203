use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::SdpError;
use crate::algebra::{Letter, SwapControls};
use crate::geometry::AnglePoint;
use crate::realization::{from_bloch_angles, QubitRealization};
use crate::simulator::{bob_frame_target, StateVector};

/// A cosine this close to zero lets the control be the bare observable.
const DIRECT_TOL: f64 = 1e-9;

/// How one side's `X'` control is supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuxChoice {
    /// `X' = A1` (or `B1`); needs the matching cosine to vanish.
    Direct,
    /// `X' = A2` (or `B2`), tied to the ideal control by a localizing
    /// matrix.
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionConfig {
    pub name: String,
    pub angles: AnglePoint,
    pub xa: AuxChoice,
    pub xb: AuxChoice,
    /// Ideal `(⟨A0 B2⟩, ⟨A1 B2⟩)` when Bob has a genuine third setting.
    pub third_bob: Option<[f64; 2]>,
    pub epsilon: f64,
}

impl CriterionConfig {
    /// Four-setting criterion at a canonical point, with each side's
    /// auxiliary observable introduced only when needed.
    pub fn four_setting(angles: AnglePoint, epsilon: f64) -> Result<Self, SdpError> {
        let theta = angles.theta().ok_or_else(|| SdpError::InvalidConfig("angle point is not canonical".into()))?;
        let pick = |c: f64| if c.abs() <= DIRECT_TOL { AuxChoice::Direct } else { AuxChoice::Auxiliary };
        let cfg = Self {
            name: format!(
                "theta={:.6},alpha00={:.6},alpha01={:.6}",
                theta,
                angles.get(0, 0),
                angles.get(0, 1)
            ),
            xa: pick(theta.cos()),
            xb: pick((angles.get(1, 0) + angles.get(1, 1)).cos()),
            angles,
            third_bob: None,
            epsilon,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_choices(angles: AnglePoint, xa: AuxChoice, xb: AuxChoice, epsilon: f64) -> Result<Self, SdpError> {
        let mut cfg = Self::four_setting(angles, epsilon)?;
        cfg.xa = xa;
        cfg.xb = xb;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn chsh(epsilon: f64) -> Self {
        let angles = AnglePoint::canonical(FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4).expect("valid angles");
        let mut cfg = Self::four_setting(angles, epsilon).expect("valid criterion");
        cfg.name = "chsh".into();
        cfg
    }

    /// Five operators `A0, A1; B0, B1, B2` with `⟨A0B0⟩ = ⟨A1B1⟩ = 1`,
    /// `⟨A0B1⟩ = ⟨A1B0⟩ = 0` and `⟨A0B2⟩ = ⟨A1B2⟩ = 1/√2`.
    pub fn mayers_yao(epsilon: f64) -> Self {
        let cfg = Self {
            name: "mayers-yao".into(),
            angles: AnglePoint::canonical(FRAC_PI_2, 0.0, FRAC_PI_2).expect("valid angles"),
            xa: AuxChoice::Direct,
            xb: AuxChoice::Direct,
            third_bob: Some([FRAC_1_SQRT_2, FRAC_1_SQRT_2]),
            epsilon,
        };
        cfg.validate().expect("valid criterion");
        cfg
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        let bad = |m: &str| Err(SdpError::InvalidConfig(m.into()));
        let Some(theta) = self.angles.theta() else {
            return bad("angle point is not canonical");
        };
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return bad("epsilon must be a finite nonnegative number");
        }
        if self.xa == AuxChoice::Direct && theta.cos().abs() > DIRECT_TOL {
            return bad("X'_A = A1 requires cos(alpha00+alpha10) = 0");
        }
        let phi = self.angles.get(1, 0) + self.angles.get(1, 1);
        if self.xb == AuxChoice::Direct && phi.cos().abs() > DIRECT_TOL {
            return bad("X'_B = B1 requires cos(alpha10+alpha11) = 0");
        }
        if let Some(e) = self.third_bob {
            if self.xb == AuxChoice::Auxiliary {
                return bad("B2 cannot be both a third setting and an auxiliary control");
            }
            if e.iter().any(|v| !(v.is_finite() && v.abs() <= 1.0)) {
                return bad("third-setting correlators must lie in [-1, 1]");
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Vec<Letter> {
        let mut out = vec![Letter::A0, Letter::A1];
        if self.xa == AuxChoice::Auxiliary {
            out.push(Letter::A2);
        }
        out.extend([Letter::B0, Letter::B1]);
        if self.xb == AuxChoice::Auxiliary || self.third_bob.is_some() {
            out.push(Letter::B2);
        }
        out
    }

    pub fn controls(&self) -> SwapControls {
        let xa = match self.xa {
            AuxChoice::Direct => Letter::A1,
            AuxChoice::Auxiliary => Letter::A2,
        };
        let xb = match self.xb {
            AuxChoice::Direct => Letter::B1,
            AuxChoice::Auxiliary => Letter::B2,
        };
        SwapControls::from_letters(Letter::A0, xa, Letter::B0, xb)
    }

    pub fn target(&self) -> StateVector {
        bob_frame_target(self.angles.get(0, 0))
    }

    /// Correlators fixed by the criterion, with their ideal values.
    pub fn observed(&self) -> Vec<(Letter, Letter, f64)> {
        let e = self.angles.correlators();
        let mut out = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                out.push((Letter::alice(x), Letter::bob(y), e.get(x, y)));
            }
        }
        if let Some(t) = self.third_bob {
            out.push((Letter::A0, Letter::B2, t[0]));
            out.push((Letter::A1, Letter::B2, t[1]));
        }
        out
    }

    /// The qubit strategy these statistics come from, with any auxiliary
    /// observable set to its ideal control.
    pub fn ideal_realization(&self) -> QubitRealization {
        let theta = self.angles.theta().expect("validated");
        let b = [self.angles.get(0, 0), self.angles.get(0, 1)];
        let mut r = from_bloch_angles([0.0, theta], b);
        if self.xa == AuxChoice::Auxiliary {
            r = r.with_aux_a(FRAC_PI_2);
        }
        if self.xb == AuxChoice::Auxiliary {
            r = r.with_aux_b(b[0] + FRAC_PI_2);
        }
        if let Some(t) = self.third_bob {
            // Bloch angle of B2 reproducing ⟨A0B2⟩ and ⟨A1B2⟩
            let phi = t[0].clamp(-1.0, 1.0).acos();
            let phi = if ((theta - phi).cos() - t[1]).abs() <= ((theta + phi).cos() - t[1]).abs() { phi } else { -phi };
            r = r.with_aux_b(phi);
        }
        r
    }
}

/// The five curves of the robustness figure: the four-setting family
/// `θ = π/2, α00 = π/4` with `α01 ∈ {π/2, 7π/12, 2π/3, 3π/4}`, and the
/// five-setting Mayers–Yao criterion.
pub fn fig5_presets(epsilon: f64) -> Vec<CriterionConfig> {
    let mut out: Vec<CriterionConfig> = [(6.0, "pi/2"), (7.0, "7pi/12"), (8.0, "2pi/3")]
        .into_iter()
        .map(|(k, label)| {
            let angles = AnglePoint::canonical(FRAC_PI_2, FRAC_PI_4, k * PI / 12.0).expect("valid angles");
            let mut cfg = CriterionConfig::four_setting(angles, epsilon).expect("valid criterion");
            cfg.name = format!("alpha01={label}");
            cfg
        })
        .collect();
    out.push(CriterionConfig::chsh(epsilon));
    out.push(CriterionConfig::mayers_yao(epsilon));
    out
}
