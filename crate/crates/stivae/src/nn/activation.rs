//! Elementwise activation functions.

/// Activation applied after a dense layer's affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    /// Leaky rectified linear unit with negative slope 0.01.
    LeakyRelu,
    /// Exponential linear unit: `x` for `x >= 0`, `exp(x) - 1` otherwise.
    Elu,
}

pub const LEAKY_SLOPE: f64 = 0.01;

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::LeakyRelu => {
                if x >= 0.0 {
                    x
                } else {
                    LEAKY_SLOPE * x
                }
            }
            Activation::Elu => {
                if x >= 0.0 {
                    x
                } else {
                    x.exp() - 1.0
                }
            }
        }
    }

    /// Derivative as a function of the pre-activation input.
    #[inline]
    pub fn grad(self, x: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::LeakyRelu => {
                if x >= 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
            Activation::Elu => {
                if x >= 0.0 {
                    1.0
                } else {
                    x.exp()
                }
            }
        }
    }

    /// Parse a tag as used in configs and CSV sidecars.
    pub fn parse(tag: &str) -> Option<Activation> {
        match tag {
            "linear" => Some(Activation::Linear),
            "leaky-relu" => Some(Activation::LeakyRelu),
            "elu" => Some(Activation::Elu),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::LeakyRelu => "leaky-relu",
            Activation::Elu => "elu",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_on_grid() {
        // 1000 points in [-5, 5]; exact agreement with the closed forms.
        for i in 0..1000 {
            let x = -5.0 + 10.0 * (i as f64) / 999.0;
            let lr = if x >= 0.0 { x } else { 0.01 * x };
            let elu = if x >= 0.0 { x } else { x.exp() - 1.0 };
            assert_eq!(Activation::LeakyRelu.apply(x), lr);
            assert_eq!(Activation::Elu.apply(x), elu);
        }
    }

    #[test]
    fn continuous_at_zero() {
        let eps = 1e-12;
        for act in [Activation::LeakyRelu, Activation::Elu] {
            assert!((act.apply(eps) - act.apply(-eps)).abs() < 1e-11);
            assert_eq!(act.apply(0.0), 0.0);
        }
    }

    #[test]
    fn tags_round_trip() {
        for act in [Activation::Linear, Activation::LeakyRelu, Activation::Elu] {
            assert_eq!(Activation::parse(act.tag()), Some(act));
        }
        assert_eq!(Activation::parse("tanh"), None);
    }
}
