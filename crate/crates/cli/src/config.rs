//! Command-line arguments and their validation into a [`RunConfig`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use csq_core::symbols::GridSpec;
use csq_core::{Parameters, DEFAULT_TOL};

/// Environment variable replacing the built-in default tolerance.
pub const TOL_ENV: &str = "CSQ_DEFAULT_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum System {
    Circle,
    Well,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Op,
    Spectrum,
    Symbol,
    Dispersion,
    Verify,
    Norm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Parser)]
#[command(
    name = "csq",
    version,
    about = "Coherent-state quantization on the circle and in the infinite square well",
    after_help = "The system may also be given as the first word: `csq well spectrum --which q`."
)]
pub struct Args {
    /// What to compute.
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long, value_enum, default_value = "well")]
    pub system: System,
    /// Operator or symbol tag (q, p, p2, q2, h, commutator, u, qt, shift, ...).
    #[arg(long)]
    pub which: Option<String>,
    /// Truncation: levels 1..=N in the well, −N..=N on the circle.
    #[arg(long = "size", short = 'N')]
    pub size: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    /// qmin:qmax:nq,pmin:pmax:np (circle norm: pmin:pmax:np).
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub time: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output CSV path; a `.meta` sidecar is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fast")]
    pub level: Level,
}

/// Rewrites a leading `circle`/`well` word into `--system <word>`.
pub fn normalize_args<I, T>(args: I) -> Vec<OsString>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut v: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some(first) = v.get(1).and_then(|s| s.to_str()) {
        if first == "circle" || first == "well" {
            let word = OsString::from(first);
            v.splice(1..2, [OsString::from("--system"), word]);
        }
    }
    v
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown --which `{tag}` for {system} {command}; expected one of: {allowed}")]
    UnknownTag {
        tag: String,
        system: &'static str,
        command: &'static str,
        allowed: String,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Operator and symbol tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Position,
    Momentum,
    MomentumSquared,
    PositionSquared,
    Hamiltonian,
    Commutator,
    Evolution,
    PositionAt,
    Identity,
    Shift,
    MomentumShift,
    DispersionQ,
    DispersionP,
    Uncertainty,
}

const TAGS: [(&str, Which); 14] = [
    ("q", Which::Position),
    ("p", Which::Momentum),
    ("p2", Which::MomentumSquared),
    ("q2", Which::PositionSquared),
    ("h", Which::Hamiltonian),
    ("commutator", Which::Commutator),
    ("u", Which::Evolution),
    ("qt", Which::PositionAt),
    ("identity", Which::Identity),
    ("shift", Which::Shift),
    ("pshift", Which::MomentumShift),
    ("dq", Which::DispersionQ),
    ("dp", Which::DispersionP),
    ("dqdp", Which::Uncertainty),
];

impl Which {
    pub fn tag(self) -> &'static str {
        TAGS.iter().find(|(_, w)| *w == self).map(|(t, _)| *t).unwrap_or("?")
    }

    fn allowed(system: System, command: Command) -> &'static [&'static str] {
        match (system, command) {
            (System::Well, Command::Op) => &["q", "p", "p2", "q2", "h", "commutator", "u", "qt", "identity"],
            (System::Well, Command::Spectrum) => &["q", "p", "p2", "q2", "h", "commutator"],
            (System::Well, Command::Symbol) => &["q", "qt", "p", "commutator"],
            (System::Well, Command::Dispersion) => &["dq", "dp", "dqdp"],
            (System::Circle, Command::Op) => &["q", "p", "shift", "commutator", "pshift", "identity"],
            (System::Circle, Command::Spectrum) => &["q", "p"],
            (System::Circle, Command::Symbol) => &["q", "p", "shift", "commutator"],
            _ => &[],
        }
    }

    fn default_for(command: Command) -> Option<&'static str> {
        match command {
            Command::Op | Command::Spectrum | Command::Symbol => Some("q"),
            Command::Dispersion => Some("dqdp"),
            Command::Verify | Command::Norm => None,
        }
    }
}

fn system_name(s: System) -> &'static str {
    match s {
        System::Circle => "circle",
        System::Well => "well",
    }
}

pub fn command_name(c: Command) -> &'static str {
    match c {
        Command::Op => "op",
        Command::Spectrum => "spectrum",
        Command::Symbol => "symbol",
        Command::Dispersion => "dispersion",
        Command::Verify => "verify",
        Command::Norm => "norm",
    }
}

/// A validated request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: System,
    pub command: Command,
    pub which: Option<Which>,
    pub size: usize,
    pub params: Parameters,
    pub grid: Option<GridSpec>,
    pub time: f64,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub level: Level,
}

impl RunConfig {
    pub fn system_name(&self) -> &'static str {
        system_name(self.system)
    }

    pub fn command_name(&self) -> &'static str {
        command_name(self.command)
    }
}

fn parse_axis(s: &str) -> Result<(f64, f64, usize), ConfigError> {
    let bad = || ConfigError::Invalid(format!("grid axis `{s}` must look like min:max:count"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || lo > hi || n == 0 {
        return Err(bad());
    }
    Ok((lo, hi, n))
}

/// Parses `qmin:qmax:nq,pmin:pmax:np`, or a single p axis when `p_only`.
pub fn parse_grid(s: &str, p_only: bool) -> Result<GridSpec, ConfigError> {
    let axes: Vec<&str> = s.split(',').collect();
    match (axes.as_slice(), p_only) {
        ([p], true) => {
            let (p0, p1, np) = parse_axis(p)?;
            Ok(GridSpec {
                q_range: (0.0, 0.0),
                p_range: (p0, p1),
                n_q: 1,
                n_p: np,
            })
        }
        ([q, p], _) => {
            let (q0, q1, nq) = parse_axis(q)?;
            let (p0, p1, np) = parse_axis(p)?;
            Ok(GridSpec {
                q_range: (q0, q1),
                p_range: (p0, p1),
                n_q: nq,
                n_p: np,
            })
        }
        _ => Err(ConfigError::Invalid(format!(
            "grid `{s}` must look like qmin:qmax:nq,pmin:pmax:np"
        ))),
    }
}

fn default_size(system: System, command: Command) -> usize {
    match (system, command) {
        (System::Well, Command::Spectrum) => csq_core::well::SPECTRUM_SIZE,
        (System::Well, _) => csq_core::well::SYMBOL_SIZE,
        (System::Circle, _) => 16,
    }
}

fn circle_grid() -> GridSpec {
    GridSpec {
        q_range: (0.0, 2.0 * std::f64::consts::PI),
        p_range: (-3.0, 3.0),
        n_q: csq_core::symbols::GRID_POINTS,
        n_p: csq_core::symbols::GRID_POINTS,
    }
}

impl Args {
    /// Validates the arguments; `env_tol` is the value of [`TOL_ENV`].
    pub fn into_config(self, env_tol: Option<&str>) -> Result<RunConfig, ConfigError> {
        let system = self.system;
        let command = self.command;

        let which = match (&self.which, Which::default_for(command)) {
            (Some(tag), None) => {
                return Err(ConfigError::Invalid(format!(
                    "--which `{tag}` has no meaning for {}",
                    command_name(command)
                )))
            }
            (_, None) => None,
            (tag, Some(default)) => {
                let tag = tag.as_deref().unwrap_or(default);
                let allowed = Which::allowed(system, command);
                if !allowed.contains(&tag) {
                    return Err(ConfigError::UnknownTag {
                        tag: tag.to_string(),
                        system: system_name(system),
                        command: command_name(command),
                        allowed: if allowed.is_empty() {
                            "(command not available)".to_string()
                        } else {
                            allowed.join(", ")
                        },
                    });
                }
                TAGS.iter().find(|(t, _)| *t == tag).map(|(_, w)| *w)
            }
        };

        if command != Command::Verify {
            match system {
                System::Circle if self.theta.is_some() => {
                    return Err(ConfigError::Invalid(
                        "--theta applies to the well; use --epsilon".into(),
                    ))
                }
                System::Well if self.epsilon.is_some() => {
                    return Err(ConfigError::Invalid(
                        "--epsilon applies to the circle; use --theta".into(),
                    ))
                }
                _ => {}
            }
        }

        let mut params = Parameters::default();
        let set = |r: csq_core::Result<Parameters>| r.map_err(|e| ConfigError::Invalid(e.to_string()));
        if let Some(v) = self.hbar {
            params = set(params.hbar(v))?;
        }
        if let Some(v) = self.mass {
            params = set(params.mass(v))?;
        }
        if let Some(v) = self.length {
            params = set(params.length(v))?;
        }
        if let Some(v) = self.theta {
            params = set(params.theta(v))?;
        }
        if let Some(v) = self.epsilon {
            params = set(params.epsilon(v))?;
        }

        let size = self.size.unwrap_or_else(|| default_size(system, command));
        if size == 0 && command != Command::Verify {
            return Err(ConfigError::Invalid("--size must be at least 1".into()));
        }

        let needs_time = matches!(which, Some(Which::Evolution | Which::PositionAt));
        if self.time.is_some() && !needs_time {
            return Err(ConfigError::Invalid("--time only applies to --which u or qt".into()));
        }
        let time = self.time.unwrap_or(0.0);
        if !time.is_finite() {
            return Err(ConfigError::Invalid("--time must be finite".into()));
        }

        let tol = match (self.tol, env_tol) {
            (Some(t), _) => t,
            (None, Some(s)) => s
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{TOL_ENV}=`{s}` is not a number")))?,
            (None, None) => DEFAULT_TOL,
        };
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(ConfigError::Invalid(format!("tolerance must be positive, got {tol}")));
        }

        let gridded = matches!(command, Command::Symbol | Command::Dispersion | Command::Norm);
        let grid = match (&self.grid, gridded) {
            (Some(_), false) => {
                return Err(ConfigError::Invalid(format!(
                    "--grid has no meaning for {}",
                    command_name(command)
                )))
            }
            (_, false) => None,
            (Some(g), true) => Some(parse_grid(g, system == System::Circle && command == Command::Norm)?),
            (None, true) => Some(match system {
                System::Well => GridSpec::standard(&params, size),
                System::Circle => circle_grid(),
            }),
        };
        if let (Some(g), System::Well) = (&grid, system) {
            g.validate(&params).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }

        Ok(RunConfig {
            system,
            command,
            which,
            size,
            params,
            grid,
            time,
            tol,
            out: self.out,
            level: self.level,
        })
    }
}

/// Parses and validates a full argument vector (program name first).
pub fn parse<I, T>(argv: I, env_tol: Option<&str>) -> Result<RunConfig, String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = Args::try_parse_from(normalize_args(argv)).map_err(|e| e.to_string())?;
    args.into_config(env_tol).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> Result<RunConfig, String> {
        let mut v = vec!["csq"];
        v.extend_from_slice(args);
        parse(v, None)
    }

    #[test]
    fn leading_system_word() {
        let c = cfg(&[
            "well",
            "spectrum",
            "--which",
            "commutator",
            "--size",
            "48",
            "--theta",
            "10",
        ])
        .unwrap();
        assert_eq!(c.system, System::Well);
        assert_eq!(c.command, Command::Spectrum);
        assert_eq!(c.which, Some(Which::Commutator));
        assert_eq!(c.size, 48);
        assert_eq!(c.params.theta_value(), 10.0);
        let d = cfg(&["spectrum", "--system", "circle", "--which", "p"]).unwrap();
        assert_eq!(d.system, System::Circle);
    }

    #[test]
    fn defaults() {
        let c = cfg(&["symbol"]).unwrap();
        assert_eq!(c.which, Some(Which::Position));
        assert_eq!(c.size, 32);
        assert_eq!(c.tol, DEFAULT_TOL);
        let g = c.grid.unwrap();
        assert_eq!((g.n_q, g.n_p), (101, 101));
        assert_eq!(cfg(&["spectrum"]).unwrap().size, 64);
    }

    #[test]
    fn tolerance_precedence() {
        let args = ["csq", "op"];
        assert_eq!(parse(args, Some("1e-9")).unwrap().tol, 1e-9);
        assert_eq!(parse(["csq", "op", "--tol", "1e-7"], Some("1e-9")).unwrap().tol, 1e-7);
        assert!(parse(args, Some("abc")).is_err());
    }

    #[test]
    fn rejections() {
        assert!(cfg(&["well", "op", "--which", "nope"])
            .unwrap_err()
            .contains("unknown --which"));
        assert!(cfg(&["circle", "dispersion"]).is_err());
        assert!(cfg(&["well", "op", "--epsilon", "1"]).is_err());
        assert!(cfg(&["circle", "op", "--theta", "1"]).is_err());
        assert!(cfg(&["well", "op", "--which", "q", "--time", "1"]).is_err());
        assert!(cfg(&["well", "symbol", "--grid", "0:1:3"]).is_err());
        assert!(cfg(&["well", "symbol", "--grid", "0:1:3,0:1:3"]).is_err());
        assert!(cfg(&["well", "op", "--size", "0"]).is_err());
        assert!(cfg(&["well", "op", "--theta", "-1"]).is_err());
        assert!(cfg(&["verify", "--which", "q"]).is_err());
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0.1:3:5,-2:2:9", false).unwrap();
        assert_eq!(g.q_range, (0.1, 3.0));
        assert_eq!((g.n_q, g.n_p), (5, 9));
        let p = parse_grid("-1:1:11", true).unwrap();
        assert_eq!(p.n_p, 11);
        assert!(parse_grid("1:0:3,0:1:2", false).is_err());
        assert!(parse_grid("0:1:0,0:1:2", false).is_err());
    }
}
