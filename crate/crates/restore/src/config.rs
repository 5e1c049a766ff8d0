//! Flat `key = value` configuration files.
//!
//! ```text
//! # blur and noise
//! kernel = uniform 3x3
//! boundary = zeropad
//! alpha = 0.1
//! tv.mu = 0.02
//! vartheta = 0.05
//! ```
//!
//! Blank lines and text after `#` are ignored. Unknown keys, repeated keys
//! and malformed values are reported with their line number.

use std::fmt;
use std::path::Path;

use ppxa_core::conv::{Boundary, ConvOperator, PeriodicRule};
use ppxa_core::frame::{HaarFrame, HaarUnion2, IdentityFrame, TightFrame};
use ppxa_core::ppxa::{PpxaParams, Relaxation};
use ppxa_core::prox::{Exponent, ScalarFn, SeparablePenalty};
use ppxa_core::tv::{Coupling, GradientFilter, TvConfig};
use ppxa_core::Image;

use std::sync::Arc;

use crate::problem::{assemble, restore, Algorithm, Interpolation, Observation, Restored};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: `{}`: {}", self.key, self.message),
            None => write!(f, "`{}`: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `Q x Q` box blur with taps `1/Q^2`.
    Uniform(usize),
    Taps(Image),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Identity,
    Haar,
    HaarUnion2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub kernel: KernelSpec,
    pub boundary: Boundary,
    pub periodic_rule: PeriodicRule,
    pub tv_filter: GradientFilter,
    pub tv_coupling: Coupling,
    pub mu: f64,
    pub frame: FrameKind,
    pub frame_levels: usize,
    pub penalty_p: Exponent,
    pub alpha: f64,
    pub seed: u64,
    pub vartheta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub algorithm: Algorithm,
    /// How the observation becomes the starting image.
    pub init: Interpolation,
    pub box_lo: f64,
    pub box_hi: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            kernel: KernelSpec::Uniform(3),
            boundary: Boundary::ZeroPad,
            periodic_rule: PeriodicRule::default(),
            tv_filter: GradientFilter::Roberts,
            tv_coupling: Coupling::Isotropic,
            mu: 0.0,
            frame: FrameKind::Haar,
            frame_levels: 3,
            penalty_p: Exponent::One,
            alpha: 1.0,
            seed: 0,
            vartheta: 0.0,
            gamma: PpxaParams::DEFAULT_GAMMA,
            lambda: PpxaParams::DEFAULT_LAMBDA,
            tol: PpxaParams::DEFAULT_TOL,
            max_iter: PpxaParams::DEFAULT_MAX_ITER,
            algorithm: Algorithm::Accelerated,
            init: Interpolation::Hold,
            box_lo: 0.0,
            box_hi: 255.0,
        }
    }
}

const KEYS: &[&str] = &[
    "kernel",
    "boundary",
    "decimation",
    "periodic.rule",
    "tv.filter",
    "tv.coupling",
    "tv.mu",
    "frame",
    "frame.levels",
    "penalty.p",
    "alpha",
    "seed",
    "vartheta",
    "gamma",
    "lambda",
    "tol",
    "max_iter",
    "algorithm",
    "init",
    "box",
];

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v
        .parse()
        .map_err(|_| format!("expected a number, got `{v}`"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, got `{v}`"))
    }
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse()
        .map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn parse_kernel(v: &str) -> Result<KernelSpec, String> {
    if let Some(rest) = v.strip_prefix("uniform") {
        let rest = rest.trim();
        let q = match rest.split_once('x') {
            Some((a, b)) => {
                let (a, b) = (parse_usize(a.trim())?, parse_usize(b.trim())?);
                if a != b {
                    return Err(format!("uniform kernels are square, got {a}x{b}"));
                }
                a
            }
            None => parse_usize(rest)?,
        };
        if q == 0 {
            return Err("kernel size must be >= 1".into());
        }
        return Ok(KernelSpec::Uniform(q));
    }
    let rows: Vec<Vec<f64>> = v
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|t| parse_f64(t.trim()))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err("kernel rows must have the same number of taps".into());
    }
    if rows.iter().flatten().any(|&t| t < 0.0) {
        return Err("kernel taps must be non-negative".into());
    }
    if rows.iter().flatten().all(|&t| t == 0.0) {
        return Err("kernel must have a non-zero tap".into());
    }
    Image::from_vec(rows.len(), width, rows.concat())
        .map(KernelSpec::Taps)
        .map_err(|e| e.to_string())
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut decimation: Option<(usize, usize)> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let err = |key: &str, message: String| ConfigError {
                line: Some(line),
                key: key.to_string(),
                message,
            };
            let Some((key, value)) = content.split_once('=') else {
                return Err(err(content, "expected `key = value`".into()));
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
                return Err(err(key, "unknown key".into()));
            };
            if seen.contains(&known) {
                return Err(err(key, "key given twice".into()));
            }
            seen.push(known);
            let bad = |m: String| err(key, m);
            match known {
                "kernel" => cfg.kernel = parse_kernel(value).map_err(bad)?,
                "boundary" => {
                    cfg.boundary = match value {
                        "valid" => Boundary::Valid,
                        "zeropad" => Boundary::ZeroPad,
                        "periodic" => Boundary::Periodic,
                        _ => {
                            return Err(bad(format!(
                                "expected valid|zeropad|periodic, got `{value}`"
                            )))
                        }
                    }
                }
                "decimation" => {
                    let d = parse_usize(value).map_err(bad)?;
                    if d == 0 {
                        return Err(bad("decimation must be >= 1".into()));
                    }
                    decimation = Some((d, line));
                }
                "periodic.rule" => {
                    cfg.periodic_rule = match value {
                        "wrap" => PeriodicRule::WrapSingletons,
                        "divisor" => PeriodicRule::Divisor,
                        _ => return Err(bad(format!("expected wrap|divisor, got `{value}`"))),
                    }
                }
                "tv.filter" => {
                    cfg.tv_filter = match value {
                        "roberts" => GradientFilter::Roberts,
                        "finite_diff" => GradientFilter::FiniteDifference,
                        "prewitt" => GradientFilter::Prewitt,
                        "sobel" => GradientFilter::Sobel,
                        _ => {
                            return Err(bad(format!(
                                "expected roberts|finite_diff|prewitt|sobel, got `{value}`"
                            )))
                        }
                    }
                }
                "tv.coupling" => {
                    cfg.tv_coupling = match value {
                        "iso" => Coupling::Isotropic,
                        "aniso" => Coupling::Anisotropic,
                        _ => return Err(bad(format!("expected iso|aniso, got `{value}`"))),
                    }
                }
                "tv.mu" => {
                    cfg.mu = parse_f64(value).map_err(bad)?;
                    if cfg.mu < 0.0 {
                        return Err(bad("must be >= 0".into()));
                    }
                }
                "frame" => {
                    cfg.frame = match value {
                        "identity" => FrameKind::Identity,
                        "haar" => FrameKind::Haar,
                        "haar_union2" => FrameKind::HaarUnion2,
                        _ => {
                            return Err(bad(format!(
                                "expected identity|haar|haar_union2, got `{value}`"
                            )))
                        }
                    }
                }
                "frame.levels" => {
                    cfg.frame_levels = parse_usize(value).map_err(bad)?;
                    if !(1..=3).contains(&cfg.frame_levels) {
                        return Err(bad("must be 1, 2 or 3".into()));
                    }
                }
                "penalty.p" => {
                    cfg.penalty_p = Exponent::from_value(parse_f64(value).map_err(bad)?)
                        .map_err(|e| bad(e.to_string()))?
                }
                "alpha" => {
                    cfg.alpha = parse_f64(value).map_err(bad)?;
                    if cfg.alpha <= 0.0 {
                        return Err(bad("must be > 0".into()));
                    }
                }
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| bad(format!("expected an unsigned integer, got `{value}`")))?
                }
                "vartheta" => {
                    cfg.vartheta = parse_f64(value).map_err(bad)?;
                    if cfg.vartheta < 0.0 {
                        return Err(bad("must be >= 0".into()));
                    }
                }
                "gamma" => cfg.gamma = parse_f64(value).map_err(bad)?,
                "lambda" => cfg.lambda = parse_f64(value).map_err(bad)?,
                "tol" => cfg.tol = parse_f64(value).map_err(bad)?,
                "max_iter" => cfg.max_iter = parse_usize(value).map_err(bad)?,
                "algorithm" => {
                    cfg.algorithm = match value {
                        "ppxa" => Algorithm::Ppxa,
                        "accelerated" => Algorithm::Accelerated,
                        _ => return Err(bad(format!("expected ppxa|accelerated, got `{value}`"))),
                    }
                }
                "init" => {
                    cfg.init = match value {
                        "hold" => Interpolation::Hold,
                        "zero" => Interpolation::Zero,
                        _ => return Err(bad(format!("expected hold|zero, got `{value}`"))),
                    }
                }
                "box" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 2 {
                        return Err(bad("expected two bounds `lo hi`".into()));
                    }
                    let lo = parse_f64(parts[0]).map_err(bad)?;
                    let hi = parse_f64(parts[1]).map_err(bad)?;
                    if lo > hi {
                        return Err(bad(format!("lower bound {lo} exceeds upper bound {hi}")));
                    }
                    (cfg.box_lo, cfg.box_hi) = (lo, hi);
                }
                _ => unreachable!(),
            }
        }
        if let Some((d, line)) = decimation {
            if d > 1 {
                if cfg.boundary != Boundary::ZeroPad {
                    return Err(ConfigError {
                        line: Some(line),
                        key: "decimation".into(),
                        message: "decimation > 1 requires boundary = zeropad".into(),
                    });
                }
                cfg.boundary = Boundary::Decimated(d);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Config> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Config::parse(&text)
            .map_err(|e| anyhow::Error::new(e).context(format!("in {}", path.display())))
    }

    pub fn kernel_image(&self) -> Image {
        match &self.kernel {
            KernelSpec::Uniform(q) => Image::filled(*q, *q, 1.0 / (q * q) as f64),
            KernelSpec::Taps(k) => k.clone(),
        }
    }

    pub fn operator(&self, rows: usize, cols: usize) -> ppxa_core::Result<ConvOperator> {
        ConvOperator::new_2d(&self.kernel_image(), rows, cols, self.boundary)
    }

    /// Image shape that produces an observation of the given shape.
    pub fn input_shape(&self, out_rows: usize, out_cols: usize) -> (usize, usize) {
        let k = self.kernel_image();
        let along = |m: usize, q: usize| match self.boundary {
            Boundary::Valid => m + q - 1,
            Boundary::ZeroPad | Boundary::Periodic => m,
            Boundary::Decimated(d) => m * d,
        };
        (along(out_rows, k.rows()), along(out_cols, k.cols()))
    }

    pub fn tv_config(&self) -> ppxa_core::Result<TvConfig> {
        TvConfig::from_filter(self.tv_filter, self.tv_coupling, self.mu)
    }

    pub fn frame(&self, rows: usize, cols: usize) -> ppxa_core::Result<Box<dyn TightFrame>> {
        Ok(match self.frame {
            FrameKind::Identity => Box::new(IdentityFrame::new(rows * cols)),
            FrameKind::Haar => Box::new(HaarFrame::new(rows, cols, self.frame_levels)?),
            FrameKind::HaarUnion2 => Box::new(HaarUnion2::new(rows, cols, self.frame_levels)?),
        })
    }

    /// `Phi` on `k` coefficients: `|x|^p` each.
    pub fn penalty(&self, k: usize) -> ppxa_core::Result<SeparablePenalty> {
        SeparablePenalty::uniform(
            k,
            ScalarFn::Power {
                chi: 1.0,
                p: self.penalty_p,
            },
        )
    }

    /// Degrades `image` with the configured blur, `alpha` and `seed`.
    pub fn degrade(&self, image: &Image) -> ppxa_core::Result<Observation> {
        let op = self.operator(image.rows(), image.cols())?;
        crate::poisson::degrade(image, Arc::new(op), self.alpha, self.seed)
    }

    /// Restores an image from the counts `z` of an observation.
    pub fn restore(&self, z: &Image) -> ppxa_core::Result<Restored> {
        let (rows, cols) = self.input_shape(z.rows(), z.cols());
        let op = Arc::new(self.operator(rows, cols)?);
        if op.output_shape() != z.shape() {
            return Err(ppxa_core::Error::ShapeMismatch {
                expected: op.output_len(),
                got: z.len(),
            });
        }
        let obs = Observation::new(z.as_slice().to_vec(), self.alpha, op)?;
        let frame = self.frame(rows, cols)?;
        let penalty = self.penalty(frame.coeff_len())?;
        let problem = assemble(
            &obs,
            frame,
            &self.tv_config()?,
            &penalty,
            self.vartheta,
            (self.box_lo, self.box_hi),
            self.periodic_rule,
        )?;
        let init = obs.grid_estimate(self.init, self.box_lo, self.box_hi);
        restore(
            &problem,
            &self.params(problem.weights().to_vec()),
            &init,
            self.algorithm,
        )
    }

    pub fn params(&self, weights: Vec<f64>) -> PpxaParams {
        PpxaParams {
            gamma: self.gamma,
            weights,
            relaxation: Relaxation::Constant(self.lambda),
            max_iter: self.max_iter,
            tol: self.tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(Config::parse("# nothing\n\n").unwrap(), Config::default());
    }

    #[test]
    fn parses_every_key() {
        let text = "kernel = 1, 2; 3, 4\nboundary = zeropad\ndecimation = 2\nperiodic.rule = divisor\n\
                    tv.filter = sobel\ntv.coupling = aniso\ntv.mu = 0.5\nframe = haar_union2\nframe.levels = 2\n\
                    penalty.p = 1.5\nalpha = 0.1\nseed = 9\nvartheta = 0.2\ngamma = 10\nlambda = 1.2\ntol = 1e-4\n\
                    max_iter = 77\nalgorithm = ppxa\ninit = zero\nbox = -1 300  # trailing comment\n";
        let c = Config::parse(text).unwrap();
        assert_eq!(
            c.kernel,
            KernelSpec::Taps(Image::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap())
        );
        assert_eq!(c.boundary, Boundary::Decimated(2));
        assert_eq!(c.periodic_rule, PeriodicRule::Divisor);
        assert_eq!(
            (c.tv_filter, c.tv_coupling, c.mu),
            (GradientFilter::Sobel, Coupling::Anisotropic, 0.5)
        );
        assert_eq!((c.frame, c.frame_levels), (FrameKind::HaarUnion2, 2));
        assert_eq!(c.penalty_p, Exponent::ThreeHalves);
        assert_eq!(
            (c.alpha, c.seed, c.vartheta, c.gamma, c.lambda, c.tol, c.max_iter),
            (0.1, 9, 0.2, 10.0, 1.2, 1e-4, 77)
        );
        assert_eq!(
            (c.algorithm, c.init),
            (Algorithm::Ppxa, Interpolation::Zero)
        );
        assert_eq!((c.box_lo, c.box_hi), (-1.0, 300.0));
    }

    #[test]
    fn unknown_key_names_line_and_key() {
        let e = Config::parse("alpha = 1\n\nbeta = 2\n").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (Some(3), "beta"));
        assert_eq!(e.to_string(), "line 3: `beta`: unknown key");
    }

    #[test]
    fn malformed_values_are_reported() {
        for (text, key) in [
            ("alpha = -1", "alpha"),
            ("kernel = uniform 3x4", "kernel"),
            ("kernel = 1, -2", "kernel"),
            ("boundary = mirror", "boundary"),
            ("frame.levels = 4", "frame.levels"),
            ("penalty.p = 2.5", "penalty.p"),
            ("box = 5 1", "box"),
            ("tol = nan", "tol"),
            ("alpha = 1\nalpha = 2", "alpha"),
            ("alpha", "alpha"),
        ] {
            let e = Config::parse(text).unwrap_err();
            assert_eq!(e.key, key, "{text}");
        }
    }

    #[test]
    fn decimation_needs_zero_padding() {
        let e = Config::parse("boundary = periodic\ndecimation = 2").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (Some(2), "decimation"));
        assert_eq!(
            Config::parse("boundary = periodic\ndecimation = 1")
                .unwrap()
                .boundary,
            Boundary::Periodic
        );
    }

    #[test]
    fn relaxation_is_range_checked_by_the_solver_not_the_parser() {
        assert_eq!(Config::parse("lambda = 2.5").unwrap().lambda, 2.5);
    }

    #[test]
    fn input_shape_inverts_output_shape() {
        for text in [
            "boundary = valid",
            "boundary = zeropad",
            "boundary = periodic",
            "decimation = 2",
        ] {
            let c = Config::parse(text).unwrap();
            let op = c.operator(16, 16).unwrap();
            let (m1, m2) = op.output_shape();
            assert_eq!(c.input_shape(m1, m2), (16, 16), "{text}");
        }
    }
}
