use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid molecule `{name}`: {reason}")]
    InvalidMolecule { name: String, reason: String },

    #[error("degenerate normal frequency: (1{sign}x_f)(1{sign}x_g) = {factor} is not positive")]
    DegenerateFrequency { sign: char, factor: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid solver configuration: {0}")]
    InvalidSolver(String),

    #[error("kinetic element G = {value} is not positive at t = {t} fs")]
    NonPositiveKinetic { t: f64, value: f64 },

    #[error("step size underflow at t = {t} fs (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error(
        "Ermakov amplitude collapsed at t = {t} fs: alpha = {alpha:e} is below the guard {guard:e}"
    )]
    AlphaCollapse { t: f64, alpha: f64, guard: f64 },

    #[error("time series are not aligned: {0}")]
    MisalignedSeries(String),

    #[error("grid spans {span} but at least {required} (6 sigma_S) is required")]
    GridTooNarrow { span: f64, required: f64 },

    #[error("{0}")]
    Config(String),

    #[error("invariant budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
