//! Angle-sequence generation for the three direction regimes, separation
//! certificates (C, ζ, t·), and certificate/lacunarity verification.
//!
//! Deep tails underflow double precision, so every sequence carries its
//! log-tangents and all pairwise checks run in log space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// ln below which exp() leaves the normal range.
const LN_UNDERFLOW: f64 = -700.0;

#[derive(Debug, Error)]
pub enum AngleError {
    #[error("invalid sequence spec: {0}")]
    InvalidSpec(String),
    #[error("tangent underflows double precision at index {index} (ln tangent {ln_tangent:.3})")]
    UnderflowAtIndex { index: usize, ln_tangent: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Direction-sequence regime with its growth parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    /// m_{j+1} = r_j·m_j with r_j ∈ [λ, μ].
    Lacunary {
        lambda: f64,
        mu: f64,
        m0: f64,
        #[serde(default)]
        ratios: Option<Vec<f64>>,
    },
    /// m_{j+1} = r_j·m_j^d with integer d ≥ 2 and r_j ∈ [λ, μ].
    Superlacunary {
        d: u32,
        lambda: f64,
        mu: f64,
        m0: f64,
        #[serde(default)]
        ratios: Option<Vec<f64>>,
    },
    /// m_j = a_j^{j^d} with d ∈ (0,1) and a ≤ a_j ≤ b nonincreasing,
    /// emitted from the start index where the tail inequalities hold.
    Power {
        d: f64,
        a: f64,
        b: f64,
        #[serde(default)]
        coeffs: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSequenceSpec {
    pub regime: Regime,
    pub count: usize,
}

impl AngleSequenceSpec {
    pub fn new(regime: Regime, count: usize) -> Result<Self, AngleError> {
        let spec = AngleSequenceSpec { regime, count };
        spec.validate()?;
        Ok(spec)
    }

    /// Hard invariants only; the m₀ normalization window is soft and is
    /// recorded on the certificate instead.
    pub fn validate(&self) -> Result<(), AngleError> {
        if self.count == 0 {
            return Err(AngleError::InvalidSpec("count must be positive".into()));
        }
        match &self.regime {
            Regime::Lacunary {
                lambda,
                mu,
                m0,
                ratios,
            } => {
                check_ratio_band(*lambda, *mu)?;
                check_m0(*m0)?;
                check_ratios(ratios, *lambda, *mu, self.count)?;
            }
            Regime::Superlacunary {
                d,
                lambda,
                mu,
                m0,
                ratios,
            } => {
                if *d < 2 {
                    return Err(AngleError::InvalidSpec(format!(
                        "superlacunary exponent must be an integer >= 2, got {d}"
                    )));
                }
                check_ratio_band(*lambda, *mu)?;
                check_m0(*m0)?;
                check_ratios(ratios, *lambda, *mu, self.count)?;
            }
            Regime::Power { d, a, b, coeffs } => {
                if !(*d > 0.0 && *d < 1.0) {
                    return Err(AngleError::InvalidSpec(format!(
                        "power exponent must lie in (0,1), got {d}"
                    )));
                }
                if !(*a > 0.0 && a <= b && *b < 1.0) {
                    return Err(AngleError::InvalidSpec(format!(
                        "power coefficients need 0 < a <= b < 1, got a={a}, b={b}"
                    )));
                }
                if let Some(cs) = coeffs {
                    if cs.iter().any(|c| !(*c >= *a && *c <= *b)) {
                        return Err(AngleError::InvalidSpec(
                            "explicit coefficients must lie in [a, b]".into(),
                        ));
                    }
                    if cs.windows(2).any(|w| w[1] > w[0]) {
                        return Err(AngleError::InvalidSpec(
                            "explicit coefficients must be nonincreasing".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn check_ratio_band(lambda: f64, mu: f64) -> Result<(), AngleError> {
    if !(0.0 < lambda && lambda < mu && mu < 1.0) {
        return Err(AngleError::InvalidSpec(format!(
            "need 0 < lambda < mu < 1, got lambda={lambda}, mu={mu}"
        )));
    }
    Ok(())
}

fn check_m0(m0: f64) -> Result<(), AngleError> {
    if !(m0 > 0.0 && m0 < 1.0) {
        return Err(AngleError::InvalidSpec(format!(
            "initial tangent must lie in (0,1), got {m0}"
        )));
    }
    Ok(())
}

fn check_ratios(
    ratios: &Option<Vec<f64>>,
    lambda: f64,
    mu: f64,
    count: usize,
) -> Result<(), AngleError> {
    if let Some(rs) = ratios {
        if rs.len() + 1 < count {
            return Err(AngleError::InvalidSpec(format!(
                "need at least {} ratios for {count} terms, got {}",
                count - 1,
                rs.len()
            )));
        }
        if rs.iter().any(|r| !(*r >= lambda && *r <= mu)) {
            return Err(AngleError::InvalidSpec(
                "every ratio must lie in [lambda, mu]".into(),
            ));
        }
    }
    Ok(())
}

/// Strictly decreasing angles in (0, π/4] with their tangents; indexing
/// is global: `thetas[i]` is the angle of index `j0 + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSequence {
    pub thetas: Vec<f64>,
    pub tangents: Vec<f64>,
    pub ln_tangents: Vec<f64>,
    pub j0: usize,
}

impl AngleSequence {
    /// Build from explicit tangents (validated) at a given start index.
    pub fn from_tangents(tangents: Vec<f64>, j0: usize) -> Result<Self, AngleError> {
        if tangents.is_empty() {
            return Err(AngleError::InvalidInput("empty tangent list".into()));
        }
        for w in tangents.windows(2) {
            if !(w[1] < w[0]) {
                return Err(AngleError::InvalidInput(format!(
                    "tangents must strictly decrease, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if tangents.iter().any(|m| !(*m > 0.0 && *m <= 1.0)) {
            return Err(AngleError::InvalidInput(
                "tangents must lie in (0, 1]".into(),
            ));
        }
        let ln_tangents = tangents.iter().map(|m| m.ln()).collect();
        let thetas = tangents.iter().map(|m| m.atan()).collect();
        Ok(AngleSequence {
            thetas,
            tangents,
            ln_tangents,
            j0,
        })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

/// θ_j = arctan(a_j^{j^d}) — the power-regime angle at any index.
pub fn power_theta(j: usize, d: f64, a_j: f64) -> f64 {
    a_j.powf((j as f64).powf(d)).atan()
}

/// j^d − (j−1)^d ≥ (d/2)·j^{d−1}: the increment lower bound.
pub fn power_increment_ok(j: usize, d: f64) -> bool {
    let jf = j as f64;
    jf.powf(d) - (jf - 1.0).powf(d) >= 0.5 * d * jf.powf(d - 1.0)
}

/// (2/d)·j^{1−d} ≤ ½·b^{−j^d}: polynomial versus exponential tail bound,
/// compared in log space.
pub fn power_tail_ok(j: usize, d: f64, b: f64) -> bool {
    let jf = j as f64;
    let lhs_ln = (2.0 / d).ln() + (1.0 - d) * jf.ln();
    let rhs_ln = -(2f64.ln()) - jf.powf(d) * b.ln();
    lhs_ln <= rhs_ln
}

/// Smallest index from which both tail inequalities hold (the start
/// threshold is vacuous for bases below 1, so the scan starts at 1).
pub fn power_start_index(d: f64, b: f64) -> Result<usize, AngleError> {
    for j in 1..1_000_000 {
        if power_increment_ok(j, d) && power_tail_ok(j, d, b) {
            return Ok(j);
        }
    }
    Err(AngleError::InvalidSpec(format!(
        "no viable start index below 10^6 for d={d}, b={b}"
    )))
}

/// Generate the sequence for a spec. Fails with the offending index when
/// a tangent leaves the normal double range.
pub fn generate(spec: &AngleSequenceSpec) -> Result<AngleSequence, AngleError> {
    spec.validate()?;
    let n = spec.count;
    let (ln_tangents, j0): (Vec<f64>, usize) = match &spec.regime {
        Regime::Lacunary {
            lambda,
            mu,
            m0,
            ratios,
        } => (recurrence_ln(*m0, 1.0, *lambda, *mu, ratios, n)?, 0),
        Regime::Superlacunary {
            d,
            lambda,
            mu,
            m0,
            ratios,
        } => (
            recurrence_ln(*m0, *d as f64, *lambda, *mu, ratios, n)?,
            0,
        ),
        Regime::Power { d, a, b, coeffs } => {
            let j0 = power_start_index(*d, *b)?;
            let mut lns = Vec::with_capacity(n);
            for i in 0..n {
                let j = j0 + i;
                let a_j = match coeffs {
                    Some(cs) => *cs.get(j).ok_or_else(|| {
                        AngleError::InvalidSpec(format!(
                            "explicit coefficients end before index {j}"
                        ))
                    })?,
                    // Nonincreasing default with sup b and inf tending to a.
                    None => a + (b - a) * 0.5f64.powi(i as i32),
                };
                let ln_m = (j as f64).powf(*d) * a_j.ln();
                if ln_m < LN_UNDERFLOW {
                    return Err(AngleError::UnderflowAtIndex {
                        index: j,
                        ln_tangent: ln_m,
                    });
                }
                lns.push(ln_m);
            }
            (lns, j0)
        }
    };
    let tangents: Vec<f64> = ln_tangents.iter().map(|l| l.exp()).collect();
    let thetas: Vec<f64> = tangents.iter().map(|m| m.atan()).collect();
    for (i, w) in tangents.windows(2).enumerate() {
        if !(w[1] < w[0]) {
            return Err(AngleError::InvalidSpec(format!(
                "generated tangents fail to decrease at index {i}"
            )));
        }
    }
    Ok(AngleSequence {
        thetas,
        tangents,
        ln_tangents,
        j0,
    })
}

/// ln m_{j+1} = ln r_j + d·ln m_j.
fn recurrence_ln(
    m0: f64,
    d: f64,
    lambda: f64,
    mu: f64,
    ratios: &Option<Vec<f64>>,
    n: usize,
) -> Result<Vec<f64>, AngleError> {
    let default_ratio = (lambda * mu).sqrt();
    let mut lns = Vec::with_capacity(n);
    let mut ln_m = m0.ln();
    for i in 0..n {
        if ln_m < LN_UNDERFLOW {
            return Err(AngleError::UnderflowAtIndex {
                index: i,
                ln_tangent: ln_m,
            });
        }
        lns.push(ln_m);
        let r = match ratios {
            Some(rs) => rs[i.min(rs.len() - 1)],
            None => default_ratio,
        };
        ln_m = r.ln() + d * ln_m;
    }
    Ok(lns)
}

/// Index-map form of the separation exponent t_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum TForm {
    Linear,
    Exponential { base: f64 },
    Power { exponent: f64 },
}

impl TForm {
    pub fn eval(&self, k: usize) -> f64 {
        match self {
            TForm::Linear => k as f64,
            TForm::Exponential { base } => base.powi(k as i32),
            TForm::Power { exponent } => (k as f64).powf(*exponent),
        }
    }
}

/// Quantitative separation data: m_j − m_k ≥ c_sep·ζ^{t_k} for all
/// j0 ≤ j < k. Side conditions that specific regimes want are recorded
/// as flags, not hard failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub c_sep: f64,
    pub zeta: f64,
    pub t_form: TForm,
    pub beta: Option<f64>,
    pub j0: usize,
    /// ζ < 1/e (wanted by the linear-index regime); None elsewhere.
    pub zeta_below_recip_e: Option<bool>,
    /// e·ζ^{2^d − 1} for the power regime, with its below-one flag.
    pub eta: Option<f64>,
    /// Whether m₀ sat inside the [λ/2, λ] normalization window; None for
    /// the power regime, which has no m₀.
    pub m0_within_normalization: Option<bool>,
}

impl SeparationCertificate {
    /// t_k·ln ζ at global index k.
    pub fn ln_zeta_t(&self, k: usize) -> f64 {
        self.t_form.eval(k) * self.zeta.ln()
    }
}

/// The regime's certificate constants by direct substitution.
pub fn derive_certificate(spec: &AngleSequenceSpec) -> Result<SeparationCertificate, AngleError> {
    spec.validate()?;
    Ok(match &spec.regime {
        Regime::Lacunary { lambda, mu, m0, .. } => SeparationCertificate {
            c_sep: 0.5 * m0 * (1.0 / mu - 1.0),
            zeta: *lambda,
            t_form: TForm::Linear,
            beta: Some(1.0),
            j0: 0,
            zeta_below_recip_e: Some(*lambda < std::f64::consts::E.recip()),
            eta: None,
            m0_within_normalization: Some(*m0 >= 0.5 * lambda && *m0 <= *lambda),
        },
        Regime::Superlacunary {
            d, lambda, mu, m0, ..
        } => SeparationCertificate {
            c_sep: 0.5 * (mu.powf(-1.0 / (*d as f64 - 1.0)) - 1.0),
            zeta: (lambda / 2.0) * (lambda / 2.0),
            t_form: TForm::Exponential { base: *d as f64 },
            beta: None,
            j0: 0,
            zeta_below_recip_e: None,
            eta: None,
            m0_within_normalization: Some(*m0 >= 0.5 * lambda && *m0 <= *lambda),
        },
        Regime::Power { d, a, b, .. } => {
            let zeta = a * b;
            let eta = std::f64::consts::E * zeta.powf(2f64.powf(*d) - 1.0);
            SeparationCertificate {
                c_sep: 2.0,
                zeta,
                t_form: TForm::Power { exponent: *d },
                beta: Some(1.0 / d),
                j0: power_start_index(*d, *b)?,
                zeta_below_recip_e: None,
                eta: Some(eta),
                m0_within_normalization: None,
            }
        }
    })
}

/// Pairwise certificate audit. Margins are logarithmic:
/// ln(m_j − m_k) − ln(c_sep·ζ^{t_k}), so deep-tail pairs stay finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub pairs_checked: usize,
    pub separation_pass: bool,
    pub worst_ln_margin: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub tangent_gap_pass: bool,
    pub worst_tangent_ln_margin: f64,
    pub failures: Vec<(usize, usize, f64)>,
}

/// Check m_j − m_k ≥ c_sep·ζ^{t_k} and tan(θ_j−θ_k) ≥ ½(m_j − m_k)
/// over all pairs j0 ≤ j < k ≤ j0+upto (global indices).
pub fn verify_certificate(
    seq: &AngleSequence,
    cert: &SeparationCertificate,
    upto: usize,
) -> Result<CertificateReport, AngleError> {
    if seq.len() < upto + 1 {
        return Err(AngleError::InvalidInput(format!(
            "sequence has {} terms, need {}",
            seq.len(),
            upto + 1
        )));
    }
    if seq.j0 != cert.j0 {
        return Err(AngleError::InvalidInput(format!(
            "sequence starts at {}, certificate at {}",
            seq.j0, cert.j0
        )));
    }
    let mut report = CertificateReport {
        pairs_checked: 0,
        separation_pass: true,
        worst_ln_margin: f64::INFINITY,
        worst_pair: None,
        tangent_gap_pass: true,
        worst_tangent_ln_margin: f64::INFINITY,
        failures: Vec::new(),
    };
    for i in 0..upto {
        for l in i + 1..=upto {
            let (j, k) = (seq.j0 + i, seq.j0 + l);
            // ln(m_j − m_k) = ln m_j + ln(1 − m_k/m_j), stable at any scale.
            let ln_gap =
                seq.ln_tangents[i] + (-((seq.ln_tangents[l] - seq.ln_tangents[i]).exp())).ln_1p();
            let ln_bound = cert.c_sep.ln() + cert.ln_zeta_t(k);
            let margin = ln_gap - ln_bound;
            report.pairs_checked += 1;
            if margin < report.worst_ln_margin {
                report.worst_ln_margin = margin;
                report.worst_pair = Some((j, k));
            }
            if !(margin >= 0.0) {
                report.separation_pass = false;
                report.failures.push((j, k, margin));
            }
            // tan(θ_j−θ_k) = (m_j−m_k)/(1+m_j·m_k); against ½(m_j−m_k)
            // the margin is ln 2 − ln(1+m_j·m_k).
            let tan_margin =
                2f64.ln() - (seq.ln_tangents[i] + seq.ln_tangents[l]).exp().ln_1p();
            if tan_margin < report.worst_tangent_ln_margin {
                report.worst_tangent_ln_margin = tan_margin;
            }
            if !(tan_margin >= 0.0) {
                report.tangent_gap_pass = false;
                report.failures.push((j, k, tan_margin));
            }
        }
    }
    Ok(report)
}

/// Tail behaviour of consecutive tangent ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lacunarity {
    Lacunary {
        lim_inf: f64,
        lim_sup: f64,
        /// Ratios collapse toward zero (faster-than-geometric decay).
        degenerate_zero: bool,
    },
    NotLacunary {
        tail_ratio: f64,
    },
}

/// Empirical classification over the last (up to 20) consecutive ratios.
pub fn check_lacunarity(seq: &AngleSequence) -> Result<Lacunarity, AngleError> {
    if seq.len() < 10 {
        return Err(AngleError::InvalidInput(format!(
            "need at least 10 terms, got {}",
            seq.len()
        )));
    }
    let ratios: Vec<f64> = seq
        .ln_tangents
        .windows(2)
        .map(|w| (w[1] - w[0]).exp())
        .collect();
    // 20-ratio window decides lacunarity; the limits themselves are
    // estimated from the final few ratios, nearest the limit.
    let tail = &ratios[ratios.len().saturating_sub(20)..];
    let limit_window = &ratios[ratios.len().saturating_sub(5)..];
    classify_windows(tail, limit_window)
}

/// Closed-form classification at a distant index, immune to the slow
/// convergence that fools a short empirical tail.
pub fn lacunarity_of_spec(spec: &AngleSequenceSpec, j_horizon: u64) -> Result<Lacunarity, AngleError> {
    spec.validate()?;
    match &spec.regime {
        Regime::Lacunary { lambda, mu, ratios, .. } => {
            let r = match ratios {
                Some(rs) => *rs.last().unwrap(),
                None => (lambda * mu).sqrt(),
            };
            classify_ratios(&[r])
        }
        // ln(m_{j+1}/m_j) = ln r + (d−1)·ln m_j → −∞.
        Regime::Superlacunary { .. } => Ok(Lacunarity::Lacunary {
            lim_inf: 0.0,
            lim_sup: 0.0,
            degenerate_zero: true,
        }),
        // ln(m_{j+1}/m_j) = ((j+1)^d − j^d)·ln a_j → 0, so the ratio → 1.
        Regime::Power { d, a, b, .. } => {
            let j = j_horizon as f64;
            let increment = (j + 1.0).powf(*d) - j.powf(*d);
            let r_hi = (increment * a.ln()).exp();
            let r_lo = (increment * b.ln()).exp();
            let _ = r_lo;
            classify_ratios(&[r_hi])
        }
    }
}

fn classify_ratios(tail: &[f64]) -> Result<Lacunarity, AngleError> {
    classify_windows(tail, tail)
}

fn classify_windows(tail: &[f64], limit_window: &[f64]) -> Result<Lacunarity, AngleError> {
    let floor = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    if floor > 1.0 - crate::tolerances::LACUNARITY_TOL {
        return Ok(Lacunarity::NotLacunary { tail_ratio: floor });
    }
    let lim_inf = limit_window.iter().cloned().fold(f64::INFINITY, f64::min);
    let lim_sup = limit_window.iter().cloned().fold(0.0, f64::max);
    let collapsing = limit_window.windows(2).all(|w| w[1] < w[0]);
    let last = *limit_window.last().unwrap();
    Ok(Lacunarity::Lacunary {
        lim_inf,
        lim_sup,
        degenerate_zero: last < 1e-6 && (collapsing || limit_window.len() == 1),
    })
}
