use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Kepler's equation did not converge (M={m}, e={e}) after {iters} iterations")]
    KeplerNonConvergence { m: f64, e: f64, iters: usize },

    #[error("universal Kepler propagation did not converge for dt = {dt_s} s after {iters} iterations")]
    UniversalKeplerNonConvergence { dt_s: f64, iters: usize },

    #[error("singular element conversion: {0}")]
    SingularElements(String),

    #[error("Lambert: no solution for {revs} revolutions (tof too short)")]
    LambertNoSolution { revs: u32 },

    #[error("Lambert: ill-conditioned geometry (transfer angle within {0:.2e} rad of 0 or pi)")]
    LambertIllConditioned(f64),

    #[error("Lambert: non-positive time of flight")]
    LambertBadTof,

    #[error("mass depleted: alpha*dt = {0} >= 1")]
    MassDepleted(f64),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("empty catalog: {0}")]
    EmptyCatalog(String),

    #[error("duplicate asteroid id {0}")]
    DuplicateId(u64),

    #[error("degenerate synthesis ranges: {0}")]
    DegenerateRanges(String),

    #[error("ODE integrator exceeded {max_steps} steps at t={t}")]
    OdeMaxSteps { max_steps: usize, t: f64 },

    #[error("ODE step size underflow at t={0}")]
    OdeStepUnderflow(f64),

    #[error("shooting did not converge: residual {residual:.3e} after {iters} iterations")]
    ShootingNonConvergence { residual: f64, iters: usize },

    #[error("singular thrust arc: |B^T lambda| vanished")]
    SingularArc,

    #[error("beam search: no feasible first leg from Earth")]
    NoFeasibleFirstLeg,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
