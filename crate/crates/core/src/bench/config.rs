use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::lincheck::DEFAULT_MAX_OPS;
use crate::stack::{CleanupMode, DEFAULT_W};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Implementation {
    Wf,
    Treiber,
    Lock,
}

impl Implementation {
    pub const ALL: [Implementation; 3] = [
        Implementation::Wf,
        Implementation::Treiber,
        Implementation::Lock,
    ];

    /// The label used in reports and tables.
    pub fn label(self) -> &'static str {
        match self {
            Implementation::Wf => "wait-free",
            Implementation::Treiber => "treiber (plain, no elimination)",
            Implementation::Lock => "locked",
        }
    }
}

impl fmt::Display for Implementation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Implementation::Wf => "wf",
            Implementation::Treiber => "treiber",
            Implementation::Lock => "lock",
        })
    }
}

impl FromStr for Implementation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wf" => Ok(Implementation::Wf),
            "treiber" => Ok(Implementation::Treiber),
            "lock" => Ok(Implementation::Lock),
            other => Err(format!("unknown implementation `{other}`")),
        }
    }
}

/// Recorded-window settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Upper bound on operations in one window's history, drain included.
    pub max_ops: usize,
    pub windows: usize,
    /// Yield at random internal steps to shake out interleavings.
    pub chaos: bool,
}

impl WindowConfig {
    pub fn new(max_ops: usize, windows: usize) -> Self {
        WindowConfig {
            max_ops,
            windows,
            chaos: true,
        }
    }

    /// Concurrent operations per window. The drain that follows needs at
    /// most one more pop than that, which keeps the whole window within
    /// `max_ops`.
    pub fn concurrent_ops(&self) -> usize {
        (self.max_ops - 1) / 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub implementation: Implementation,
    pub threads: usize,
    pub ops_per_thread: u64,
    pub push_ratio: f64,
    pub w: u64,
    pub seed: u64,
    pub cleanup_mode: CleanupMode,
    pub record_history: Option<WindowConfig>,
    pub duration_cap_secs: Option<f64>,
    /// Stop every thread as soon as the first one finishes its operations.
    pub stop_on_first: bool,
    /// Structure samples are taken every `2^sample_shift` operations per thread.
    pub sample_shift: u32,
    /// Watchdog limit for a single operation.
    pub op_cap_secs: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            implementation: Implementation::Wf,
            threads: 4,
            ops_per_thread: 10_000,
            push_ratio: 0.5,
            w: DEFAULT_W,
            seed: 0,
            cleanup_mode: CleanupMode::default(),
            record_history: None,
            duration_cap_secs: None,
            stop_on_first: false,
            sample_shift: 10,
            op_cap_secs: 10.0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.threads < 1 {
            return Err(ConfigError::NoThreads(self.threads));
        }
        if !(0.0..=1.0).contains(&self.push_ratio) {
            return Err(ConfigError::PushRatio(self.push_ratio));
        }
        if self.w < 2 {
            return Err(ConfigError::RangeTooNarrow(self.w));
        }
        if let Some(win) = self.record_history {
            if win.max_ops < 3 {
                return Err(ConfigError::WindowTooSmall(win.max_ops));
            }
            if win.max_ops > DEFAULT_MAX_OPS {
                return Err(ConfigError::WindowTooLarge(win.max_ops, DEFAULT_MAX_OPS));
            }
        }
        Ok(())
    }
}
