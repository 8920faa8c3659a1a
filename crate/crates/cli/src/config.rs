//! Run configuration: a sectioned `key = value` file.
//!
//! ```text
//! [run]
//! seed = 7
//! samples = 200
//!
//! [params]
//! m = 3
//! a = 7/2        # fractions stay exact
//! c = 1
//! C2 = 1
//!
//! [base]
//! kind = fubini-study
//! ```
//!
//! Unknown sections and keys are errors. Every value is re-validated on load,
//! and [`RunConfig::to_text`] writes the effective configuration back in the
//! same format, so that reloading it gives an equal value.

use std::fmt::Write as _;
use std::str::FromStr;

use ini::{Ini, ParseOption};
use kahler_qe::builder::BaseKind;
use kahler_qe::rational::Number;
use kahler_qe::verifier::{Tolerances, DEFAULT_SAMPLES};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Certify,
    ConstructVerify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::ConstructVerify => "construct-verify",
            Command::Sweep => "sweep",
        }
    }
}

impl FromStr for Command {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "certify" => Ok(Command::Certify),
            "construct-verify" => Ok(Command::ConstructVerify),
            "sweep" => Ok(Command::Sweep),
            other => err(format!("unknown command {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSection {
    pub command: Option<Command>,
    pub seed: u64,
    pub samples: usize,
    /// Worker threads; 0 lets the thread pool decide.
    pub workers: usize,
    pub tolerance_scale: f64,
    pub out: Option<String>,
    /// Rows of `warp.csv`.
    pub warp_points: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            command: None,
            seed: 1,
            samples: DEFAULT_SAMPLES,
            workers: 0,
            tolerance_scale: 1.0,
            out: None,
            warp_points: 200,
        }
    }
}

/// Profile parameters. Omitted `k`, `kappa` and `lambda` are derived: on the
/// solution family for construction, and as `k = κ = λ = 0` for certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSection {
    pub m: u32,
    pub a: Number,
    pub c: Number,
    pub k: Option<Number>,
    pub kappa: Option<Number>,
    pub lambda: Option<Number>,
    pub c2: Number,
    pub b: Number,
    pub sign_phi: i8,
}

impl Default for ParamSection {
    fn default() -> Self {
        Self {
            m: 2,
            a: Number::int(1),
            c: Number::int(1),
            k: None,
            kappa: None,
            lambda: None,
            c2: Number::int(1),
            b: Number::int(1),
            sign_phi: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertifySystems {
    Main,
    F,
    Both,
}

impl CertifySystems {
    pub fn main(self) -> bool {
        self != CertifySystems::F
    }

    pub fn f(self) -> bool {
        self != CertifySystems::Main
    }

    fn name(self) -> &'static str {
        match self {
            CertifySystems::Main => "main",
            CertifySystems::F => "f",
            CertifySystems::Both => "both",
        }
    }
}

/// Which coefficient of which equation to shift, for exercising the failure
/// path of the certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct Corruption {
    /// `first` or `second`.
    pub equation: String,
    /// One of `A B C D` in `Aφ″ + Bφ′ + Cφ = D`.
    pub coefficient: char,
    pub amount: Number,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifySection {
    pub systems: CertifySystems,
    pub corrupt: Option<Corruption>,
}

impl Default for CertifySection {
    fn default() -> Self {
        Self {
            systems: CertifySystems::Both,
            corrupt: None,
        }
    }
}

/// `k` in a sweep: the solution-family value or a fixed number.
#[derive(Clone, Debug, PartialEq)]
pub enum KChoice {
    Family,
    Value(Number),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSection {
    pub m: Vec<u32>,
    pub a: Vec<Number>,
    pub c: Vec<Number>,
    pub c2: Vec<Number>,
    pub k: Vec<KChoice>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            m: vec![2, 3, 4],
            a: vec![Number::int(1), Number::int(2), Number::ratio(7, 2)],
            c: vec![Number::int(1), Number::int(-1)],
            c2: vec![Number::int(0), Number::int(1), Number::int(5)],
            k: vec![KChoice::Family],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub run: RunSection,
    pub params: ParamSection,
    pub base: BaseKind,
    pub search: Option<(f64, f64)>,
    pub tolerances: Tolerances,
    pub certify: CertifySection,
    pub sweep: SweepSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            run: RunSection::default(),
            params: ParamSection::default(),
            base: BaseKind::Flat,
            search: None,
            tolerances: Tolerances::default(),
            certify: CertifySection::default(),
            sweep: SweepSection::default(),
        }
    }
}

const TOLERANCE_KEYS: [&str; 12] = [
    "kahler",
    "killing",
    "skr",
    "ricci_hessian",
    "quasi_einstein",
    "warped_einstein_constant",
    "conformal_formulas",
    "skr_constant",
    "gradient_norm",
    "laplacian",
    "block_structure",
    "horizontal_hessian",
];

fn tolerance_slot<'a>(t: &'a mut Tolerances, key: &str) -> &'a mut f64 {
    match key {
        "kahler" => &mut t.kahler,
        "killing" => &mut t.killing,
        "skr" => &mut t.skr,
        "ricci_hessian" => &mut t.ricci_hessian,
        "quasi_einstein" => &mut t.quasi_einstein,
        "warped_einstein_constant" => &mut t.warped_einstein_constant,
        "conformal_formulas" => &mut t.conformal_formulas,
        "skr_constant" => &mut t.skr_constant,
        "gradient_norm" => &mut t.gradient_norm,
        "laplacian" => &mut t.laplacian,
        "block_structure" => &mut t.block_structure,
        "horizontal_hessian" => &mut t.horizontal_hessian,
        _ => unreachable!("key checked against TOLERANCE_KEYS"),
    }
}

fn number(key: &str, v: &str) -> Result<Number, ConfigError> {
    let n: Number = v
        .parse()
        .map_err(|_| ConfigError(format!("{key} = {v:?} is not a number")))?;
    if !n.to_f64().is_finite() {
        return err(format!("{key} = {v} is not finite"));
    }
    Ok(n)
}

fn float(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x = number(key, v)?.to_f64();
    Ok(x)
}

fn integer<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError(format!("{key} = {v:?} is not a non-negative integer")))
}

fn list<T>(key: &str, v: &str, item: impl Fn(&str, &str) -> Result<T, ConfigError>) -> Result<Vec<T>, ConfigError> {
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| item(key, s))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return err(format!("{key} is an empty list"));
    }
    Ok(items)
}

fn sign(key: &str, v: &str) -> Result<i8, ConfigError> {
    match v {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        _ => err(format!("{key} = {v:?} must be +1 or -1")),
    }
}

impl RunConfig {
    pub fn parse(src: &str) -> Result<Self, ConfigError> {
        let opt = ParseOption {
            enabled_escape: false,
            ..ParseOption::default()
        };
        let ini = Ini::load_from_str_opt(src, opt).map_err(|e| ConfigError(e.to_string()))?;
        let mut cfg = RunConfig::default();
        let mut seen_sections = Vec::new();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return err(format!("key {k:?} outside a section"));
                }
                continue;
            };
            if seen_sections.contains(&section) {
                return err(format!("section [{section}] appears twice"));
            }
            seen_sections.push(section);
            let mut seen_keys: Vec<&str> = Vec::new();
            for (key, value) in props.iter() {
                if seen_keys.contains(&key) {
                    return err(format!("[{section}] {key} appears twice"));
                }
                seen_keys.push(key);
                cfg.set(section, key, value.trim())?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, v: &str) -> Result<(), ConfigError> {
        let qualified = format!("{section}.{key}");
        let q = qualified.as_str();
        match (section, key) {
            ("run", "command") => self.run.command = Some(v.parse()?),
            ("run", "seed") => self.run.seed = integer(q, v)?,
            ("run", "samples") => self.run.samples = integer(q, v)?,
            ("run", "workers") => self.run.workers = integer(q, v)?,
            ("run", "tolerance_scale") => self.run.tolerance_scale = float(q, v)?,
            ("run", "out") => self.run.out = Some(v.to_string()),
            ("run", "warp_points") => self.run.warp_points = integer(q, v)?,
            ("params", "m") => self.params.m = integer(q, v)?,
            ("params", "a") => self.params.a = number(q, v)?,
            ("params", "c") => self.params.c = number(q, v)?,
            ("params", "k") => self.params.k = Some(number(q, v)?),
            ("params", "kappa") => self.params.kappa = Some(number(q, v)?),
            ("params", "lambda") => self.params.lambda = Some(number(q, v)?),
            ("params", "C2") => self.params.c2 = number(q, v)?,
            ("params", "b") => self.params.b = number(q, v)?,
            ("params", "sign_phi") => self.params.sign_phi = sign(q, v)?,
            ("base", "kind") => self.base = v.parse().map_err(ConfigError)?,
            ("search", "range") => {
                let r = list(q, v, float)?;
                if r.len() != 2 || r[0] >= r[1] {
                    return err(format!("{q} must be two increasing numbers"));
                }
                self.search = Some((r[0], r[1]));
            }
            ("tolerances", t) if TOLERANCE_KEYS.contains(&t) => *tolerance_slot(&mut self.tolerances, t) = float(q, v)?,
            ("certify", "systems") => {
                self.certify.systems = match v {
                    "main" => CertifySystems::Main,
                    "f" => CertifySystems::F,
                    "both" => CertifySystems::Both,
                    _ => return err(format!("{q} = {v:?} must be main, f or both")),
                }
            }
            ("certify", "corrupt") => {
                // `first.B + 1/100`
                let (target, amount) = v
                    .split_once('+')
                    .ok_or_else(|| ConfigError(format!("{q} must look like first.B + 1/100")))?;
                let (eq, coef) = target
                    .trim()
                    .split_once('.')
                    .ok_or_else(|| ConfigError(format!("{q}: expected <equation>.<coefficient>")))?;
                let coefficient = match coef {
                    "A" | "B" | "C" | "D" => coef.chars().next().unwrap(),
                    _ => return err(format!("{q}: coefficient must be A, B, C or D")),
                };
                if eq != "first" && eq != "second" {
                    return err(format!("{q}: equation must be first or second"));
                }
                self.certify.corrupt = Some(Corruption {
                    equation: eq.to_string(),
                    coefficient,
                    amount: number(q, amount.trim())?,
                });
            }
            ("sweep", "m") => self.sweep.m = list(q, v, integer)?,
            ("sweep", "a") => self.sweep.a = list(q, v, number)?,
            ("sweep", "c") => self.sweep.c = list(q, v, number)?,
            ("sweep", "C2") => self.sweep.c2 = list(q, v, number)?,
            ("sweep", "k") => {
                self.sweep.k = list(q, v, |key, s| {
                    if s == "family" {
                        Ok(KChoice::Family)
                    } else {
                        number(key, s).map(KChoice::Value)
                    }
                })?
            }
            _ => return err(format!("unknown key {q}")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.run.samples == 0 {
            return err("run.samples must be positive");
        }
        if !(self.run.tolerance_scale > 0.0) {
            return err("run.tolerance_scale must be positive");
        }
        if self.run.warp_points == 0 {
            return err("run.warp_points must be positive");
        }
        let m_ok = |m: u32| (2..=5).contains(&m);
        if !m_ok(self.params.m) {
            return err(format!("params.m = {} must be between 2 and 5", self.params.m));
        }
        if let Some(&m) = self.sweep.m.iter().find(|&&m| !m_ok(m)) {
            return err(format!("sweep.m contains {m}; m must be between 2 and 5"));
        }
        let positive = |key: &str, a: &Number| {
            if a.is_positive() {
                Ok(())
            } else {
                err(format!("{key} = {a} must be positive"))
            }
        };
        positive("params.a", &self.params.a)?;
        for a in &self.sweep.a {
            positive("sweep.a", a)?;
        }
        if self.params.b.is_zero() {
            return err("params.b must be nonzero");
        }
        for (k, t) in TOLERANCE_KEYS.iter().zip(self.tolerance_values()) {
            if !(t > 0.0) {
                return err(format!("tolerances.{k} must be positive"));
            }
        }
        Ok(())
    }

    fn tolerance_values(&self) -> Vec<f64> {
        let mut t = self.tolerances.clone();
        TOLERANCE_KEYS.iter().map(|k| *tolerance_slot(&mut t, k)).collect()
    }

    /// Tolerances after `run.tolerance_scale`.
    pub fn effective_tolerances(&self) -> Tolerances {
        self.tolerances.scaled(self.run.tolerance_scale)
    }

    /// The configuration with every value spelled out. Exact numbers are
    /// written as fractions, floats with an exponent, so they reload
    /// unchanged.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let float = |x: f64| format!("{x:e}");
        let join = |v: Vec<String>| v.join(", ");
        s.push_str("[run]\n");
        if let Some(c) = self.run.command {
            writeln!(s, "command = {}", c.name()).unwrap();
        }
        writeln!(s, "seed = {}", self.run.seed).unwrap();
        writeln!(s, "samples = {}", self.run.samples).unwrap();
        writeln!(s, "workers = {}", self.run.workers).unwrap();
        writeln!(s, "tolerance_scale = {}", float(self.run.tolerance_scale)).unwrap();
        if let Some(o) = &self.run.out {
            writeln!(s, "out = {o}").unwrap();
        }
        writeln!(s, "warp_points = {}", self.run.warp_points).unwrap();

        let p = &self.params;
        s.push_str("\n[params]\n");
        writeln!(s, "m = {}", p.m).unwrap();
        writeln!(s, "a = {}", p.a).unwrap();
        writeln!(s, "c = {}", p.c).unwrap();
        for (name, v) in [("k", &p.k), ("kappa", &p.kappa), ("lambda", &p.lambda)] {
            if let Some(v) = v {
                writeln!(s, "{name} = {v}").unwrap();
            }
        }
        writeln!(s, "C2 = {}", p.c2).unwrap();
        writeln!(s, "b = {}", p.b).unwrap();
        writeln!(s, "sign_phi = {}", p.sign_phi).unwrap();

        writeln!(s, "\n[base]\nkind = {}", self.base).unwrap();
        if let Some((lo, hi)) = self.search {
            writeln!(s, "\n[search]\nrange = {}, {}", float(lo), float(hi)).unwrap();
        }

        s.push_str("\n[tolerances]\n");
        for (k, t) in TOLERANCE_KEYS.iter().zip(self.tolerance_values()) {
            writeln!(s, "{k} = {}", float(t)).unwrap();
        }

        writeln!(s, "\n[certify]\nsystems = {}", self.certify.systems.name()).unwrap();
        if let Some(c) = &self.certify.corrupt {
            writeln!(s, "corrupt = {}.{} + {}", c.equation, c.coefficient, c.amount).unwrap();
        }

        let sw = &self.sweep;
        s.push_str("\n[sweep]\n");
        writeln!(s, "m = {}", join(sw.m.iter().map(u32::to_string).collect())).unwrap();
        writeln!(s, "a = {}", join(sw.a.iter().map(Number::to_string).collect())).unwrap();
        writeln!(s, "c = {}", join(sw.c.iter().map(Number::to_string).collect())).unwrap();
        writeln!(s, "C2 = {}", join(sw.c2.iter().map(Number::to_string).collect())).unwrap();
        let ks =
            sw.k.iter()
                .map(|k| match k {
                    KChoice::Family => "family".to_string(),
                    KChoice::Value(v) => v.to_string(),
                })
                .collect();
        writeln!(s, "k = {}", join(ks)).unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_input() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn fractions_stay_exact() {
        let cfg = RunConfig::parse("[params]\na = 7/2\nc = -0.25\nC2 = 1e-3\n").unwrap();
        assert_eq!(cfg.params.a, Number::ratio(7, 2));
        assert_eq!(cfg.params.c, Number::ratio(-1, 4));
        assert!(matches!(cfg.params.c2, Number::Float(_)));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(RunConfig::parse("[params]\nalpha = 1\n").is_err());
        assert!(RunConfig::parse("[nonsense]\nm = 1\n").is_err());
        assert!(RunConfig::parse("[params]\nm = 2\nm = 3\n").is_err());
        assert!(RunConfig::parse("m = 2\n").is_err());
        assert!(RunConfig::parse("[params]\nm = 1\n").is_err());
        assert!(RunConfig::parse("[params]\na = -1\n").is_err());
        assert!(RunConfig::parse("[run]\nsamples = 0\n").is_err());
        assert!(RunConfig::parse("[search]\nrange = 3, 1\n").is_err());
    }

    #[test]
    fn inline_comments() {
        let cfg = RunConfig::parse("[params]\nm = 3 # complex dimension\n").unwrap();
        assert_eq!(cfg.params.m, 3);
    }

    #[test]
    fn text_round_trip() {
        let src = "[run]\ncommand = sweep\nseed = 9\ntolerance_scale = 0.1\n\
                   [params]\nm = 4\na = 7/2\nc = -3\nk = 1e-2\nC2 = 5\nsign_phi = -1\n\
                   [base]\nkind = fubini-study\n[search]\nrange = 0.5, 7\n\
                   [tolerances]\nskr = 3e-9\n[certify]\nsystems = main\ncorrupt = second.C + 1/100\n\
                   [sweep]\nm = 2, 3\nk = family, 0\n";
        let cfg = RunConfig::parse(src).unwrap();
        let again = RunConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(again.to_text(), cfg.to_text());
    }
}
