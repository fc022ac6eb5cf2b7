//! Weibull accelerated-failure-time distribution under a life-stress model:
//! `log T = mu(S) + sigma * eps`, with `eps` standard smallest-extreme-value,
//! so `T` is Weibull with shape `1/sigma` and scale `exp(mu(S))`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lifestress::LifeStressModel;

/// Regression coefficients and log-lifetime scale of the AFT model.
#[derive(Debug, Clone, PartialEq)]
pub struct AftParams {
    pub beta: Vec<f64>,
    pub sigma: f64,
}

impl AftParams {
    pub fn new(beta: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma must be a positive finite number, got {sigma}"
            )));
        }
        Ok(Self { beta, sigma })
    }
}

/// One tested unit: failure time or right-censoring time at a fixed stress.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensoredObservation {
    pub stress: f64,
    pub time: f64,
    /// `true` = failure observed, `false` = right-censored at `time`.
    pub observed: bool,
}

/// Collection of censored observations from one experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CensoredDataset {
    pub observations: Vec<CensoredObservation>,
}

impl CensoredDataset {
    pub fn new(observations: Vec<CensoredObservation>) -> Self {
        Self { observations }
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn n_observed(&self) -> usize {
        self.observations.iter().filter(|o| o.observed).count()
    }

    /// Reads the `stress,time,status` CSV format (status: 1 failed, 0 censored).
    /// Lines starting with `#` are ignored.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let expected = ["stress", "time", "status"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse(format!(
                "expected CSV header `stress,time,status`, got {:?}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut observations = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse(format!("line {line}: missing field {i}")))?
                    .parse::<f64>()
                    .map_err(|e| {
                        Error::Parse(format!("line {line}: {:?}: {e}", rec.get(i).unwrap()))
                    })
            };
            let stress = field(0)?;
            let time = field(1)?;
            let status = field(2)?;
            if !(time > 0.0) {
                return Err(Error::Parse(format!(
                    "line {line}: time must be positive, got {time}"
                )));
            }
            let observed = match status as i64 {
                1 => true,
                0 => false,
                _ => {
                    return Err(Error::Parse(format!(
                        "line {line}: status must be 0 or 1, got {status}"
                    )))
                }
            };
            observations.push(CensoredObservation {
                stress,
                time,
                observed,
            });
        }
        Ok(Self { observations })
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Writes the `stress,time,status` CSV format. `preamble` lines (if any)
    /// are emitted first as `#` comments.
    pub fn write_csv<W: Write>(&self, mut writer: W, preamble: &[String]) -> Result<()> {
        for line in preamble {
            writeln!(writer, "# {line}")?;
        }
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["stress", "time", "status"])?;
        for o in &self.observations {
            wtr.write_record([
                format!("{}", o.stress),
                format!("{}", o.time),
                if o.observed { "1".into() } else { "0".into() },
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn check_params(model: &LifeStressModel, params: &AftParams) -> Result<()> {
    if params.beta.len() != model.basis_dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.basis_dimension(),
            got: params.beta.len(),
        });
    }
    if !(params.sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {}",
            params.sigma
        )));
    }
    Ok(())
}

/// `R(t | s) = exp(-(t / exp(mu(s)))^(1/sigma))`.
pub fn reliability(t: f64, s: f64, model: &LifeStressModel, params: &AftParams) -> Result<f64> {
    check_params(model, params)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let mu = model.location(&params.beta, s)?;
    if t == 0.0 {
        return Ok(1.0);
    }
    let z = (t.ln() - mu) / params.sigma;
    Ok((-z.exp()).exp())
}

/// Natural log of the Weibull density at `t` given stress `s`.
pub fn log_density(t: f64, s: f64, model: &LifeStressModel, params: &AftParams) -> Result<f64> {
    check_params(model, params)?;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "time must be positive, got {t}"
        )));
    }
    let mu = model.location(&params.beta, s)?;
    let z = (t.ln() - mu) / params.sigma;
    Ok(-params.sigma.ln() - t.ln() + z - z.exp())
}

/// Quantile `q_tau(s) = exp(mu(s)) * (-ln(1 - tau))^sigma`.
pub fn quantile(tau: f64, s: f64, model: &LifeStressModel, params: &AftParams) -> Result<f64> {
    check_params(model, params)?;
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must lie in (0, 1), got {tau}"
        )));
    }
    let mu = model.location(&params.beta, s)?;
    Ok(mu.exp() * (-(1.0 - tau).ln()).powf(params.sigma))
}

/// Inverse-transform sample: `exp(mu(s) + sigma * ln(-ln(1-u)))`, equal to
/// `quantile(u, s)`.
pub fn sample_lifetime(
    s: f64,
    model: &LifeStressModel,
    params: &AftParams,
    u: f64,
) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "uniform variate must lie in (0, 1), got {u}"
        )));
    }
    quantile(u, s, model, params)
}

/// Right-censored log-likelihood: `sum d_i log f(t_i) + (1-d_i) log R(t_i)`.
pub fn log_likelihood(
    data: &CensoredDataset,
    model: &LifeStressModel,
    params: &AftParams,
) -> Result<f64> {
    check_params(model, params)?;
    let mut ll = 0.0;
    for o in &data.observations {
        if !(o.time > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "time must be positive, got {}",
                o.time
            )));
        }
        let mu = model.location(&params.beta, o.stress)?;
        let z = (o.time.ln() - mu) / params.sigma;
        ll += if o.observed {
            -params.sigma.ln() - o.time.ln() + z - z.exp()
        } else {
            -z.exp()
        };
    }
    Ok(ll)
}
