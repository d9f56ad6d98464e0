use std::io::{Read, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::exact::ExactKawv;
use crate::fogd::{FogdConfig, FogdForecaster};
use crate::forecaster::Forecaster;
use crate::harness::dataset::Dataset;
use crate::kernel::KernelSpec;
use crate::nystrom::{KorsConfig, NystromForecaster};
use crate::taylor::{choose_m, TaylorBasis, TaylorForecaster};

pub const RECORD_HEADER: [&str; 7] = ["t", "y", "yhat", "loss", "cum_loss", "elapsed_ns", "dict_size"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Exact,
    Taylor,
    Nystrom,
    NystromBeforehand,
    Fogd,
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "taylor" => Ok(Self::Taylor),
            "nystrom" => Ok(Self::Nystrom),
            "nystrom-beforehand" | "nystrom_beforehand" => Ok(Self::NystromBeforehand),
            "fogd" => Ok(Self::Fogd),
            other => Err(Error::input(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Task {
    #[default]
    Regression,
    Classification,
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(Self::Regression),
            "classification" => Ok(Self::Classification),
            other => Err(Error::input(format!("unknown task {other:?}"))),
        }
    }
}

/// Everything needed to build a forecaster and drive it over a dataset.
///
/// `bound` is the label bound `B` used only when evaluating regret bounds;
/// predictions are never clipped.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub algo: Algo,
    pub lambda: f64,
    pub sigma: f64,
    /// Taylor degree cap; chosen from the data when absent.
    pub max_degree: Option<u32>,
    pub mu: f64,
    pub beta: f64,
    pub eps: f64,
    pub delta: f64,
    pub features: usize,
    /// FOGD learning rate; `1/sqrt(n)` when absent.
    pub eta: Option<f64>,
    pub seed: u64,
    pub bound: f64,
    pub task: Task,
    pub limit_n: Option<usize>,
    pub timeout: Option<Duration>,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Exact,
            lambda: 1.0,
            sigma: 1.0,
            max_degree: None,
            mu: 1.0,
            beta: 1.0,
            eps: 0.5,
            delta: 0.1,
            features: 1000,
            eta: None,
            seed: 0,
            bound: 1.0,
            task: Task::Regression,
            limit_n: None,
            timeout: None,
        }
    }
}

impl HarnessConfig {
    pub fn with_algo(algo: Algo) -> Self {
        Self {
            algo,
            ..Self::default()
        }
    }

    pub fn kernel(&self) -> Result<KernelSpec> {
        KernelSpec::gaussian(self.sigma)
    }

    pub fn kors(&self) -> Result<KorsConfig> {
        KorsConfig::new(self.mu, self.beta, self.eps, self.delta, self.seed)
    }

    /// Forecaster for `data` (the beforehand Nyström variant reads its inputs).
    pub fn build(&self, data: &Dataset) -> Result<Box<dyn Forecaster>> {
        let n = self.limit_n.map_or(data.len(), |l| l.min(data.len()));
        let head = data.head(n);
        self.build_for(data.dim(), n, head.radius(), Some(&head.inputs))
    }

    /// Forecaster for a stream of `n` inputs of dimension `dim` and norm at most `radius`.
    pub fn build_for(
        &self,
        dim: usize,
        n: usize,
        radius: f64,
        inputs: Option<&[Vec<f64>]>,
    ) -> Result<Box<dyn Forecaster>> {
        if self.bound.is_nan() || self.bound <= 0.0 {
            return Err(Error::input("label bound B must be positive"));
        }
        let kernel = self.kernel()?;
        Ok(match self.algo {
            Algo::Exact => Box::new(ExactKawv::new(kernel, self.lambda)?),
            Algo::Taylor => {
                let m = self
                    .max_degree
                    .unwrap_or_else(|| choose_m(radius, self.sigma, n, self.lambda));
                let basis = TaylorBasis::new(m, dim.max(1), self.sigma)?;
                Box::new(TaylorForecaster::new(basis, self.lambda)?)
            }
            Algo::Nystrom => Box::new(NystromForecaster::new(kernel, self.lambda, self.kors()?)?),
            Algo::NystromBeforehand => {
                let inputs = inputs.ok_or_else(|| {
                    Error::input("the beforehand Nyström variant needs the input sequence up front")
                })?;
                Box::new(NystromForecaster::beforehand(
                    kernel,
                    self.lambda,
                    self.kors()?,
                    inputs,
                )?)
            }
            Algo::Fogd => {
                let mut cfg = FogdConfig::with_defaults(n, self.sigma, self.seed);
                cfg.features = self.features;
                if let Some(eta) = self.eta {
                    cfg.eta = eta;
                }
                Box::new(FogdForecaster::new(cfg, dim.max(1))?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub t: usize,
    pub y: f64,
    pub yhat: f64,
    pub loss: f64,
    pub cum_loss: f64,
    pub elapsed_ns: u64,
    pub dict_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub records: Vec<RunRecord>,
    /// Sign mismatches, with `sign(0) = +1`; classification runs only.
    pub misclassified: Option<usize>,
    pub timed_out: bool,
    pub fallbacks: usize,
    pub stored_floats: usize,
}

impl RunOutcome {
    pub fn average_loss(&self) -> f64 {
        match self.records.last() {
            Some(r) => r.cum_loss / self.records.len() as f64,
            None => 0.0,
        }
    }

    pub fn classification_error(&self) -> Option<f64> {
        let n = self.records.len();
        self.misclassified
            .map(|m| if n == 0 { 0.0 } else { m as f64 / n as f64 })
    }

    /// Rounds per second, excluding the first round.
    pub fn throughput(&self) -> Option<f64> {
        let rest = self.records.get(1..)?;
        let ns: u64 = rest.iter().map(|r| r.elapsed_ns).sum();
        if rest.is_empty() || ns == 0 {
            None
        } else {
            Some(rest.len() as f64 / (ns as f64 * 1e-9))
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StreamOptions {
    pub task: Task,
    pub limit_n: Option<usize>,
    pub timeout: Option<Duration>,
}

fn at_step(e: Error, t: usize) -> Error {
    match e {
        Error::Input(m) => Error::Input(format!("step {t}: {m}")),
        Error::Protocol(m) => Error::Protocol(format!("step {t}: {m}")),
        Error::Numeric(m) => Error::Numeric(format!("step {t}: {m}")),
        other => other,
    }
}

/// One pass over `data`: predict `x_t`, then reveal `y_t`.
pub fn run_forecaster(
    forecaster: &mut dyn Forecaster,
    data: &Dataset,
    opts: StreamOptions,
) -> Result<RunOutcome> {
    let n = opts.limit_n.map_or(data.len(), |l| l.min(data.len()));
    let start = Instant::now();
    let mut records = Vec::with_capacity(n);
    let mut cum = 0.0;
    let mut wrong = 0usize;
    let mut timed_out = false;
    for (i, (x, &y)) in data.inputs.iter().zip(&data.labels).take(n).enumerate() {
        if let Some(limit) = opts.timeout {
            if start.elapsed() >= limit {
                timed_out = true;
                break;
            }
        }
        let t = i + 1;
        let t0 = Instant::now();
        let yhat = forecaster.predict(x).map_err(|e| at_step(e, t))?;
        forecaster.update(y).map_err(|e| at_step(e, t))?;
        let elapsed_ns = t0.elapsed().as_nanos() as u64;
        let loss = (y - yhat) * (y - yhat);
        cum += loss;
        if opts.task == Task::Classification {
            let sign = if yhat >= 0.0 { 1.0 } else { -1.0 };
            let truth = if y >= 0.0 { 1.0 } else { -1.0 };
            if sign != truth {
                wrong += 1;
            }
        }
        records.push(RunRecord {
            t,
            y,
            yhat,
            loss,
            cum_loss: cum,
            elapsed_ns,
            dict_size: forecaster.dict_size(),
        });
    }
    Ok(RunOutcome {
        records,
        misclassified: (opts.task == Task::Classification).then_some(wrong),
        timed_out,
        fallbacks: forecaster.fallbacks(),
        stored_floats: forecaster.stored_floats(),
    })
}

pub fn run_stream(config: &HarnessConfig, data: &Dataset) -> Result<RunOutcome> {
    let mut f = config.build(data)?;
    run_forecaster(
        f.as_mut(),
        data,
        StreamOptions {
            task: config.task,
            limit_n: config.limit_n,
            timeout: config.timeout,
        },
    )
}

pub fn write_records<W: Write>(writer: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(RECORD_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record(&[
            r.t.to_string(),
            r.y.to_string(),
            r.yhat.to_string(),
            r.loss.to_string(),
            r.cum_loss.to_string(),
            r.elapsed_ns.to_string(),
            r.dict_size.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?
        .clone();
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let field = |j: usize| rec.get(j).unwrap_or("");
        let bad = |what: &str| Error::Parse {
            line,
            msg: format!("bad {what} field"),
        };
        out.push(RunRecord {
            t: field(0).parse().map_err(|_| bad("t"))?,
            y: field(1).parse().map_err(|_| bad("y"))?,
            yhat: field(2).parse().map_err(|_| bad("yhat"))?,
            loss: field(3).parse().map_err(|_| bad("loss"))?,
            cum_loss: field(4).parse().map_err(|_| bad("cum_loss"))?,
            elapsed_ns: field(5).parse().map_err(|_| bad("elapsed_ns"))?,
            dict_size: field(6).parse().map_err(|_| bad("dict_size"))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        Dataset::new(
            vec![vec![0.0], vec![0.5], vec![-0.5], vec![1.0]],
            vec![1.0, -0.5, 0.25, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn empty_dataset_gives_no_records() {
        for algo in [Algo::Exact, Algo::Taylor, Algo::Nystrom, Algo::Fogd] {
            let cfg = HarnessConfig::with_algo(algo);
            let out = run_stream(&cfg, &Dataset::default()).unwrap();
            assert!(out.records.is_empty());
        }
    }

    #[test]
    fn single_example_predicts_zero() {
        let data = Dataset::new(vec![vec![0.3, 0.1]], vec![0.7]).unwrap();
        for algo in [
            Algo::Exact,
            Algo::Taylor,
            Algo::Nystrom,
            Algo::NystromBeforehand,
            Algo::Fogd,
        ] {
            let out = run_stream(&HarnessConfig::with_algo(algo), &data).unwrap();
            assert_eq!(out.records.len(), 1);
            assert_eq!(out.records[0].yhat, 0.0);
            assert!((out.records[0].loss - 0.49).abs() < 1e-15);
        }
    }

    #[test]
    fn cumulative_loss_is_running_sum() {
        let out = run_stream(&HarnessConfig::with_algo(Algo::Exact), &tiny()).unwrap();
        let total: f64 = out.records.iter().map(|r| r.loss).sum();
        assert!((out.records.last().unwrap().cum_loss - total).abs() < 1e-9);
        assert!(out.records.windows(2).all(|w| w[1].cum_loss >= w[0].cum_loss && w[1].t > w[0].t));
    }

    #[test]
    fn limit_and_classification() {
        let mut cfg = HarnessConfig::with_algo(Algo::Exact);
        cfg.limit_n = Some(2);
        cfg.task = Task::Classification;
        let out = run_stream(&cfg, &tiny()).unwrap();
        assert_eq!(out.records.len(), 2);
        // round 1: yhat = 0 -> +1, y = +1 correct; round 2: y < 0
        let m = out.misclassified.unwrap();
        let expect = usize::from(out.records[1].yhat >= 0.0);
        assert_eq!(m, expect);
    }

    #[test]
    fn zero_timeout_stops_immediately() {
        let mut cfg = HarnessConfig::with_algo(Algo::Exact);
        cfg.timeout = Some(Duration::ZERO);
        let out = run_stream(&cfg, &tiny()).unwrap();
        assert!(out.timed_out);
        assert!(out.records.is_empty());
    }

    #[test]
    fn records_csv_header() {
        let mut buf = Vec::new();
        write_records(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,y,yhat,loss,cum_loss,elapsed_ns,dict_size\n");
    }

    #[test]
    fn bad_header_rejected() {
        assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn parse_enums() {
        assert_eq!("nystrom-beforehand".parse::<Algo>().unwrap(), Algo::NystromBeforehand);
        assert!("svm".parse::<Algo>().is_err());
        assert_eq!("classification".parse::<Task>().unwrap(), Task::Classification);
    }
}
