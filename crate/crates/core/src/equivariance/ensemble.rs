use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;

use super::sampling::{density_cdf, sample_density};
use crate::error::{Error, Result};
use crate::field::Point;
use crate::integrator::{integrate_sampled, IntegratorConfig, Sampling, Status};
use crate::state::WaveFunction;

/// Fewest alive points accepted by [`ks_distance`].
pub const MIN_KS_POINTS: usize = 100;

/// Whether an ensemble member is still moving.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "state")]
pub enum Fate {
    Alive,
    /// Stopped at `time` with a terminal status; the point is its last position.
    Terminated {
        status: Status,
        time: f64,
    },
}

impl Fate {
    pub fn name(&self) -> &'static str {
        match self {
            Fate::Alive => "alive",
            Fate::Terminated { status, .. } => status.name(),
        }
    }
}

/// Configuration points sharing one time, with their provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ensemble {
    pub points: Vec<Point>,
    pub fates: Vec<Fate>,
    pub t: f64,
    pub seed: u64,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn alive(&self) -> impl Iterator<Item = &Point> {
        self.points
            .iter()
            .zip(&self.fates)
            .filter(|(_, f)| **f == Fate::Alive)
            .map(|(p, _)| p)
    }

    pub fn alive_count(&self) -> usize {
        self.fates.iter().filter(|f| **f == Fate::Alive).count()
    }

    pub fn terminated_fraction(&self) -> f64 {
        1.0 - self.alive_count() as f64 / self.len().max(1) as f64
    }

    /// Count of members per terminal status.
    pub fn terminated_by_status(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for f in &self.fates {
            if let Fate::Terminated { status, .. } = f {
                *out.entry(status.name().to_string()).or_insert(0) += 1;
            }
        }
        out
    }
}

/// `count` draws from `|psi_{t0}|^2` at `t0 = 0`.
pub fn sample_initial(state: &WaveFunction, count: usize, seed: u64) -> Result<Ensemble> {
    sample_at(state, 0.0, count, seed)
}

/// `count` draws from `|psi_t|^2`.
pub fn sample_at(state: &WaveFunction, t: f64, count: usize, seed: u64) -> Result<Ensemble> {
    let points = sample_density(state, t, count, seed)?;
    Ok(Ensemble {
        fates: vec![Fate::Alive; points.len()],
        points,
        t,
        seed,
    })
}

/// Advances every alive member to `t`.
pub fn propagate_ensemble(
    ens: &Ensemble,
    state: &WaveFunction,
    t: f64,
    config: &IntegratorConfig,
) -> Result<Ensemble> {
    Ok(propagate_ensemble_to_times(ens, state, &[t], config)?
        .pop()
        .expect("one time requested"))
}

/// Advances every alive member through the increasing (or decreasing) `times`,
/// integrating each trajectory once.
pub fn propagate_ensemble_to_times(
    ens: &Ensemble,
    state: &WaveFunction,
    times: &[f64],
    config: &IntegratorConfig,
) -> Result<Vec<Ensemble>> {
    config.validate()?;
    let Some(&last) = times.last() else {
        return Ok(Vec::new());
    };
    let targets: Vec<f64> = times.iter().copied().filter(|&t| t != ens.t).collect();
    let results: Vec<Vec<(Point, Fate)>> = ens
        .points
        .par_iter()
        .zip(&ens.fates)
        .map(|(p, fate)| -> Result<Vec<(Point, Fate)>> {
            if *fate != Fate::Alive || targets.is_empty() {
                return Ok(vec![(*p, *fate); times.len()]);
            }
            let tr = integrate_sampled(
                state,
                p,
                ens.t,
                last - ens.t,
                config,
                &Sampling::Times(targets.clone()),
            )?;
            let end = tr.last();
            let stop = Fate::Terminated {
                status: tr.status,
                time: end.t,
            };
            // samples at the requested times; an event adds one final sample
            let n = tr.samples.len();
            let reached = if tr.status == Status::Completed {
                &tr.samples[1..]
            } else {
                &tr.samples[1..n - 1]
            };
            Ok(times
                .iter()
                .map(|&t| {
                    if t == ens.t {
                        return (*p, Fate::Alive);
                    }
                    match reached.iter().find(|s| s.t == t) {
                        Some(s) => (s.q, Fate::Alive),
                        None => (end.q, stop),
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let (points, fates) = results.iter().map(|r| r[k]).unzip();
            Ensemble {
                points,
                fates,
                t,
                seed: ens.seed,
            }
        })
        .collect())
}

/// Kolmogorov-Smirnov comparison of the alive members against `|psi_t|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub ks: f64,
    pub n_alive: usize,
    /// 99% critical value `1.63 / sqrt(n_alive)`.
    pub critical: f64,
    pub terminated_fraction: f64,
}

impl KsReport {
    pub fn passes(&self) -> bool {
        self.ks < self.critical
    }
}

/// Sup distance between the empirical CDF of the alive members and the CDF of `|psi_t|^2`.
pub fn ks_distance(ens: &Ensemble, state: &WaveFunction) -> Result<KsReport> {
    if state.dim() != 1 {
        return Err(Error::Input(
            "KS distances are computed in one dimension".into(),
        ));
    }
    let mut xs: Vec<f64> = ens.alive().map(|p| p[0]).collect();
    let n = xs.len();
    if n < MIN_KS_POINTS {
        return Err(Error::Statistics(format!(
            "KS distance needs at least {MIN_KS_POINTS} alive points, got {n}"
        )));
    }
    xs.sort_by(f64::total_cmp);
    let cdf = density_cdf(state, ens.t)?;
    let nf = n as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf.cdf(x);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    Ok(KsReport {
        ks,
        n_alive: n,
        critical: 1.63 / nf.sqrt(),
        terminated_fraction: ens.terminated_fraction(),
    })
}

/// Writes `id, t, q_1..q_d, status` rows.
pub fn write_ensemble_csv<W: Write>(out: W, ensembles: &[Ensemble]) -> Result<()> {
    let dim = ensembles
        .first()
        .and_then(|e| e.points.first())
        .map_or(1, |p| p.dim());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "t".to_string()];
    header.extend((1..=dim).map(|k| format!("q_{k}")));
    header.push("status".into());
    w.write_record(&header)?;
    for ens in ensembles {
        for (id, (p, f)) in ens.points.iter().zip(&ens.fates).enumerate() {
            let mut row = vec![id.to_string(), ens.t.to_string()];
            row.extend(p.as_slice().iter().map(|x| x.to_string()));
            row.push(f.name().to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-time statistics written to the ensemble summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub t: f64,
    pub ks: Option<f64>,
    pub critical: Option<f64>,
    pub n_alive: usize,
    pub count: usize,
    pub terminated_by_status: BTreeMap<String, usize>,
    pub seed: u64,
}

impl EnsembleSummary {
    /// Summary with the KS statistic in 1D and without it in 2D.
    pub fn new(ens: &Ensemble, state: &WaveFunction) -> Result<Self> {
        let ks = if state.dim() == 1 {
            Some(ks_distance(ens, state)?)
        } else {
            None
        };
        Ok(EnsembleSummary {
            t: ens.t,
            ks: ks.map(|k| k.ks),
            critical: ks.map(|k| k.critical),
            n_alive: ens.alive_count(),
            count: ens.len(),
            terminated_by_status: ens.terminated_by_status(),
            seed: ens.seed,
        })
    }
}
