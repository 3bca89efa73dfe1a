use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{kappa, omega_for_kappa};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Which constituent of the union a component came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Divform,
    ConstantPencil,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Component {
    Point {
        re: f64,
        im: f64,
    },
    /// `[a, b] ⊂ ℝ`, endpoints may be infinite.
    RealSegment {
        #[serde(with = "extended")]
        a: f64,
        #[serde(with = "extended")]
        b: f64,
    },
    /// `{iν : ν ∈ [a, b]}`.
    ImagSegment {
        #[serde(with = "extended")]
        a: f64,
        #[serde(with = "extended")]
        b: f64,
    },
    /// `{ω : Im k_ω = 0, Re k_ω ≥ c}`.
    KappaCurve { eps0: f64, mu0: f64, sigma0: f64, c: f64 },
}

impl Component {
    pub fn point(z: Complex64) -> Self {
        Component::Point { re: z.re, im: z.im }
    }

    pub fn contains(&self, w: Complex64, tol: f64) -> bool {
        match *self {
            Component::Point { re, im } => (w - Complex64::new(re, im)).norm() <= tol,
            Component::RealSegment { a, b } => w.im.abs() <= tol && w.re >= a - tol && w.re <= b + tol,
            Component::ImagSegment { a, b } => w.re.abs() <= tol && w.im >= a - tol && w.im <= b + tol,
            Component::KappaCurve { eps0, mu0, sigma0, c } => {
                let k = kappa(w, eps0, mu0, sigma0);
                k.im.abs() <= tol * (1.0 + k.norm()) && k.re >= c - tol
            }
        }
    }

    /// `n` points of the component; infinite ranges are clipped to `extent`.
    pub fn sample(&self, n: usize, extent: f64) -> Vec<Complex64> {
        let n = n.max(2);
        let span = |a: f64, b: f64| {
            let (lo, hi) = (a.max(-extent), b.min(extent));
            if lo > hi {
                return Vec::new();
            }
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect::<Vec<_>>()
        };
        match *self {
            Component::Point { re, im } => vec![Complex64::new(re, im)],
            Component::RealSegment { a, b } => span(a, b).into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
            Component::ImagSegment { a, b } => span(a, b).into_iter().map(|y| Complex64::new(0.0, y)).collect(),
            Component::KappaCurve { eps0, mu0, sigma0, c } => {
                let half = n.div_ceil(2);
                (0..half)
                    .flat_map(|i| {
                        let t = c + extent * i as f64 / (half - 1).max(1) as f64;
                        omega_for_kappa(Complex64::from(t), eps0, mu0, sigma0)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledComponent {
    #[serde(flatten)]
    pub component: Component,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// A closed subset of ℂ given as a union of components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSet {
    pub components: Vec<LabeledComponent>,
    pub tolerance: f64,
}

impl SpectrumSet {
    pub fn new(tolerance: f64) -> Self {
        SpectrumSet { components: Vec::new(), tolerance }
    }

    pub fn push(&mut self, component: Component, provenance: Option<Provenance>) {
        self.components.push(LabeledComponent { component, provenance });
    }

    pub fn contains(&self, w: Complex64) -> bool {
        self.components.iter().any(|c| c.component.contains(w, self.tolerance))
    }

    /// Samples every component, `per_component` points each.
    pub fn sample(&self, per_component: usize, extent: f64) -> Vec<Complex64> {
        self.components.iter().flat_map(|c| c.component.sample(per_component, extent)).collect()
    }

    pub fn components_from(&self, provenance: Provenance) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(move |c| c.provenance == Some(provenance)).map(|c| &c.component)
    }
}

/// Membership, exposed under the operation's name.
pub fn membership(omega: Complex64, set: &SpectrumSet) -> bool {
    set.contains(omega)
}

mod extended {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("expected a number, \"inf\" or \"-inf\", got \"{other}\""))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn json_encodes_infinite_endpoints_as_strings() {
        let mut s = SpectrumSet::new(1e-9);
        s.push(Component::RealSegment { a: f64::NEG_INFINITY, b: -1.0 }, Some(Provenance::ConstantPencil));
        s.push(Component::point(Complex64::new(0.0, -2.0)), None);
        s.push(Component::KappaCurve { eps0: 1.0, mu0: 1.0, sigma0: 0.5, c: 0.0 }, Some(Provenance::ConstantPencil));
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["components"][0]["kind"], "real-segment");
        assert_eq!(json["components"][0]["a"], "-inf");
        assert_eq!(json["components"][0]["provenance"], "constant-pencil");
        assert_eq!(json["components"][1]["kind"], "point");
        assert_eq!(json["components"][2]["kind"], "kappa-curve");
        let back: SpectrumSet = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_unknown_string_endpoint() {
        let bad = r#"{"components":[{"kind":"real-segment","a":"nan","b":1.0}],"tolerance":0.0}"#;
        assert!(serde_json::from_str::<SpectrumSet>(bad).is_err());
    }

    #[test]
    fn kappa_curve_with_loss_has_vertical_piece() {
        // σ₀ > 0, c = 0: the horizontal line Im ω = −σ₀/(2ε₀) and the segment i[−σ₀/ε₀, 0]
        let k = Component::KappaCurve { eps0: 1.0, mu0: 1.0, sigma0: 2.0, c: 0.0 };
        assert!(k.contains(Complex64::new(0.0, -0.5), 1e-9));
        assert!(k.contains(Complex64::new(7.0, -1.0), 1e-9));
        assert!(!k.contains(Complex64::new(7.0, -0.9), 1e-9));
        assert!(!k.contains(Complex64::new(0.0, 0.3), 1e-9));
    }

    proptest! {
        #[test]
        fn sampler_output_passes_membership(
            eps0 in 0.2f64..5.0, mu0 in 0.2f64..5.0, sigma0 in 0.0f64..5.0, c in 0.0f64..10.0,
            a in -20.0f64..0.0, len in 0.0f64..20.0,
        ) {
            let comps = [
                Component::KappaCurve { eps0, mu0, sigma0, c },
                Component::RealSegment { a, b: a + len },
                Component::ImagSegment { a: f64::NEG_INFINITY, b: a + len },
                Component::point(Complex64::new(a, len)),
            ];
            for comp in comps {
                for w in comp.sample(41, 30.0) {
                    prop_assert!(comp.contains(w, 1e-9), "{comp:?} {w}");
                }
            }
        }
    }
}
