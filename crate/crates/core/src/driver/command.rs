use std::io::{ErrorKind, Read};
use std::os::unix::process::CommandExt;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use crate::driver::{Kernel, Outcome, Run};
use crate::error::{Error, Result};
use crate::space::{resolve_reformulations, BoundReformulation, Configuration, ParameterSpace};

/// How parameter values reach the kernel process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArgStyle {
    /// `--<name>=<value>` for every parameter.
    #[default]
    NamedFlags,
    /// Values in parameter order.
    Positional,
    /// One environment variable per parameter, named after it.
    EnvVars,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregate {
    #[default]
    Min,
    Median,
    Mean,
}

impl Aggregate {
    pub fn apply(self, values: &mut [f64]) -> f64 {
        match self {
            Aggregate::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregate::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregate::Median => {
                values.sort_by(f64::total_cmp);
                let n = values.len();
                if n % 2 == 1 {
                    values[n / 2]
                } else {
                    0.5 * (values[n / 2 - 1] + values[n / 2])
                }
            }
        }
    }
}

/// An external kernel binary. The objective is the last non-empty line of
/// its standard output; a nonzero exit status is a failed run.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCommand {
    pub executable: PathBuf,
    pub args: Vec<String>,
    pub arg_style: ArgStyle,
    pub timeout: Duration,
    pub repeats: usize,
    pub aggregate: Aggregate,
    /// Derived parameters passed alongside the declared ones.
    pub reformulations: Vec<BoundReformulation>,
}

impl KernelCommand {
    pub fn new(executable: impl Into<PathBuf>) -> Self {
        Self {
            executable: executable.into(),
            args: Vec::new(),
            arg_style: ArgStyle::default(),
            timeout: Duration::from_secs(60),
            repeats: 1,
            aggregate: Aggregate::default(),
            reformulations: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::InvalidArgument("kernel timeout must be positive".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidArgument("kernel repeats must be at least 1".into()));
        }
        Ok(())
    }

    fn command(&self, named: &[(String, String)]) -> Command {
        let mut cmd = Command::new(&self.executable);
        cmd.args(&self.args).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::null());
        // own process group, so a timeout can take down grandchildren too
        cmd.process_group(0);
        for (name, value) in named {
            match self.arg_style {
                ArgStyle::NamedFlags => {
                    cmd.arg(format!("--{name}={value}"));
                }
                ArgStyle::Positional => {
                    cmd.arg(value);
                }
                ArgStyle::EnvVars => {
                    cmd.env(name, value);
                }
            }
        }
        cmd
    }

    fn run_once(&self, named: &[(String, String)]) -> Result<Outcome> {
        let mut child = match self.command(named).spawn() {
            Ok(c) => c,
            Err(e) if e.kind() == ErrorKind::NotFound || e.kind() == ErrorKind::PermissionDenied => {
                return Err(Error::KernelMissing(self.executable.clone()))
            }
            Err(e) => return Err(e.into()),
        };
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut buf = String::new();
            let _ = stdout.read_to_string(&mut buf);
            buf
        });
        let status = match child.wait_timeout(self.timeout)? {
            Some(s) => s,
            None => {
                kill_group(child.id());
                let _ = child.kill();
                let _ = child.wait();
                let _ = reader.join();
                return Ok(Outcome::Timeout);
            }
        };
        let out = reader.join().unwrap_or_default();
        if !status.success() {
            return Ok(Outcome::Failed);
        }
        Ok(parse_objective(&out).map_or(Outcome::Failed, Outcome::Value))
    }
}

fn kill_group(pid: u32) {
    // SAFETY: plain syscall on a process group we created.
    unsafe {
        libc::kill(-(pid as libc::pid_t), libc::SIGKILL);
    }
}

/// Last non-empty stdout line as a finite decimal.
pub(crate) fn parse_objective(stdout: &str) -> Option<f64> {
    let line = stdout.lines().rev().find(|l| !l.trim().is_empty())?;
    line.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

impl Kernel for KernelCommand {
    fn run(&self, space: &ParameterSpace, config: &Configuration) -> Result<Run> {
        self.validate()?;
        let start = Instant::now();
        let mut named: Vec<(String, String)> = space
            .params()
            .iter()
            .zip(&config.values)
            .map(|(p, v)| (p.name.clone(), v.to_string()))
            .collect();
        match resolve_reformulations(&self.reformulations, space, config) {
            Ok(derived) => named.extend(derived.into_iter().map(|(n, v)| (n, v.to_string()))),
            Err(e) => {
                log::warn!("skipping kernel run: {e}");
                return Ok(Run { outcome: Outcome::Failed, wall_time: 0.0 });
            }
        }
        let mut values = Vec::with_capacity(self.repeats);
        for _ in 0..self.repeats {
            match self.run_once(&named)? {
                Outcome::Value(v) => values.push(v),
                other => {
                    return Ok(Run { outcome: other, wall_time: start.elapsed().as_secs_f64() })
                }
            }
        }
        Ok(Run {
            outcome: Outcome::Value(self.aggregate.apply(&mut values)),
            wall_time: start.elapsed().as_secs_f64(),
        })
    }
}
