use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("time step {dt} does not resolve delay {tau} (need dt < tau/4)")]
    DelayUnderResolved { dt: f64, tau: f64 },

    #[error("integration fault at t = {t}: {what}")]
    IntegrationFault { t: f64, what: String },

    #[error("fixed-point iteration did not converge after {iters} iterations (last residual {last:e})")]
    NotConverged {
        iters: usize,
        last: f64,
        residual_history: Vec<f64>,
    },

    #[error("iteration converged to the washout (trivial) solution after {iters} iterations")]
    ConvergedToWashout { iters: usize },

    #[error("no periodic orbit: consecutive period segments still {last:e} apart after {periods} periods")]
    NoPeriodicOrbit {
        periods: usize,
        last: f64,
        distances: Vec<f64>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
