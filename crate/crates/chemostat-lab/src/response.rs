//! Species uptake functions p_i: monotone, vanishing at zero, extended by
//! zero for negative arguments so reduced-system right-hand sides stay
//! defined when a reconstructed substrate dips below zero.

use std::fmt;

use crate::{Error, Result};

#[derive(Clone)]
enum Kind {
    /// b x / (k + x)
    MichaelisMenten { b: f64, k: f64 },
    /// b x
    Linear { b: f64 },
    /// Piecewise-linear through (x_j, y_j); held constant past the last
    /// breakpoint. Structural validity (sorted, finite) is enforced here;
    /// monotonicity and p(0)=0 are model-validation concerns so that broken
    /// tables can be constructed and reported on.
    Table(Vec<(f64, f64)>),
}

/// A substrate uptake response, evaluated as 0 for negative arguments.
#[derive(Clone)]
pub struct ResponseFn {
    kind: Kind,
}

impl fmt::Debug for ResponseFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ResponseFn({})", self.describe())
    }
}

impl ResponseFn {
    pub fn michaelis_menten(b: f64, k: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "uptake rate must be positive, got {b}"
            )));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "saturation constant must be positive, got {k}"
            )));
        }
        Ok(ResponseFn {
            kind: Kind::MichaelisMenten { b, k },
        })
    }

    pub fn linear(b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "uptake rate must be positive, got {b}"
            )));
        }
        Ok(ResponseFn {
            kind: Kind::Linear { b },
        })
    }

    /// Piecewise-linear table. Breakpoint abscissae must be finite, start at
    /// 0, and strictly increase; ordinate defects (negative values, decreasing
    /// segments, p(0) != 0) are left for model validation to report.
    pub fn table(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "table response needs at least 2 breakpoints, got {}",
                breakpoints.len()
            )));
        }
        if breakpoints
            .iter()
            .any(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::InvalidArgument(
                "table breakpoints must be finite".into(),
            ));
        }
        if breakpoints[0].0 != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "table must start at x = 0, got {}",
                breakpoints[0].0
            )));
        }
        if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidArgument(
                "table breakpoint abscissae must strictly increase".into(),
            ));
        }
        Ok(ResponseFn {
            kind: Kind::Table(breakpoints),
        })
    }

    /// p(x), with the zero extension for x < 0.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::MichaelisMenten { b, k } => b * x / (k + x),
            Kind::Linear { b } => b * x,
            Kind::Table(pts) => {
                let last = pts.len() - 1;
                if x >= pts[last].0 {
                    return pts[last].1;
                }
                // x < last abscissa and >= 0 = first abscissa: find the segment.
                let j = pts.partition_point(|(bx, _)| *bx <= x) - 1;
                let (x0, y0) = pts[j];
                let (x1, y1) = pts[j + 1];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }

    /// Whether the response increases strictly on [0, hi]. Closed forms are
    /// strictly increasing everywhere; a table fails if any segment covering
    /// [0, hi] is flat or decreasing (including the constant extension past
    /// the last breakpoint).
    pub fn is_strictly_increasing(&self, hi: f64) -> bool {
        match &self.kind {
            Kind::MichaelisMenten { .. } | Kind::Linear { .. } => true,
            Kind::Table(pts) => {
                let last = pts.len() - 1;
                if hi > pts[last].0 {
                    return false;
                }
                pts.windows(2)
                    .take_while(|w| w[0].0 < hi)
                    .all(|w| w[1].1 > w[0].1)
            }
        }
    }

    /// Slope at the origin: the per-substrate uptake rate at low
    /// concentration, used by the consumption bound B.
    pub fn initial_slope(&self) -> f64 {
        match &self.kind {
            Kind::MichaelisMenten { b, k } => b / k,
            Kind::Linear { b } => *b,
            Kind::Table(pts) => (pts[1].1 - pts[0].1) / (pts[1].0 - pts[0].0),
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            Kind::MichaelisMenten { b, k } => format!("{b} x / ({k} + x)"),
            Kind::Linear { b } => format!("{b} x"),
            Kind::Table(pts) => format!("table with {} breakpoints", pts.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn michaelis_menten_values() {
        let p = ResponseFn::michaelis_menten(10.0, 1.0).unwrap();
        assert_eq!(p.eval(0.0), 0.0);
        assert!((p.eval(1.0) - 5.0).abs() < 1e-15);
        // The Monod curve at the upper washout extremum with b = 1:
        // p(2 + 1/sqrt 2) = (2 + 1/sqrt 2) / (3 + 1/sqrt 2).
        let p1 = ResponseFn::michaelis_menten(1.0, 1.0).unwrap();
        let s = 2.0 + 1.0 / 2.0f64.sqrt();
        assert!((p1.eval(s) - 0.730_247_856_610_182_1).abs() < 1e-15);
    }

    #[test]
    fn negative_arguments_map_to_zero() {
        for p in [
            ResponseFn::michaelis_menten(2.0, 0.5).unwrap(),
            ResponseFn::linear(3.0).unwrap(),
            ResponseFn::table(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap(),
        ] {
            assert_eq!(p.eval(-1e-9), 0.0);
            assert_eq!(p.eval(-5.0), 0.0);
        }
    }

    #[test]
    fn table_interpolates_and_saturates() {
        let p = ResponseFn::table(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]).unwrap();
        assert_eq!(p.eval(0.0), 0.0);
        assert!((p.eval(0.5) - 1.0).abs() < 1e-15);
        assert!((p.eval(2.0) - 2.5).abs() < 1e-15);
        assert_eq!(p.eval(3.0), 3.0);
        assert_eq!(p.eval(10.0), 3.0);
    }

    #[test]
    fn structural_table_errors() {
        assert!(ResponseFn::table(vec![(0.0, 0.0)]).is_err());
        assert!(ResponseFn::table(vec![(0.5, 0.0), (1.0, 1.0)]).is_err());
        assert!(ResponseFn::table(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        // A decreasing segment is a validation finding, not a construction
        // error.
        assert!(ResponseFn::table(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)]).is_ok());
    }

    #[test]
    fn rates_must_be_positive() {
        assert!(ResponseFn::michaelis_menten(0.0, 1.0).is_err());
        assert!(ResponseFn::michaelis_menten(1.0, -1.0).is_err());
        assert!(ResponseFn::linear(0.0).is_err());
    }

    #[test]
    fn strict_increase_detection() {
        assert!(ResponseFn::michaelis_menten(1.0, 1.0)
            .unwrap()
            .is_strictly_increasing(100.0));
        let flat = ResponseFn::table(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)]).unwrap();
        assert!(flat.is_strictly_increasing(0.9));
        assert!(!flat.is_strictly_increasing(1.5));
        // Saturation past the final breakpoint counts as flat.
        let short = ResponseFn::table(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(!short.is_strictly_increasing(2.0));
    }
}
