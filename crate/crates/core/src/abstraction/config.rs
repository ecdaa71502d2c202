use std::fmt;
use std::str::FromStr;

use super::OpKind;

/// One approximation stage. `Simple`, `Intervals` and `FullMul` apply to
/// multiplication; `Relations` and `Full` to every operation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Stage {
    Simple,
    Intervals,
    Relations,
    /// Exact multiplication for one highest-bit-set interval of `x` per call.
    FullMul,
    /// Exact operation in one step.
    Full,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Simple => "simple",
            Stage::Intervals => "intervals",
            Stage::Relations => "relations",
            Stage::FullMul => "full-mul",
            Stage::Full => "full",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "simple" | "1" => Stage::Simple,
            "intervals" | "2" => Stage::Intervals,
            "relations" | "3" => Stage::Relations,
            "full-mul" | "fullmul" | "4" => Stage::FullMul,
            "full" => Stage::Full,
            other => return Err(ConfigError(format!("unknown stage `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum FreshSymbolPolicy {
    #[default]
    PerApplication,
    /// Applications of the same operation and width behave as one function:
    /// consistency constraints are added when a model shows equal arguments
    /// with different results.
    SharedPerOp,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum SignedMode {
    #[default]
    Signed,
    /// `bvsdiv`/`bvsrem` are first rewritten into sign-cased
    /// `bvudiv`/`bvurem` applications.
    RewriteUnsigned,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid scheme configuration: {0}")]
pub struct ConfigError(pub String);

/// Which stages run, in which order and grouping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeConfig {
    /// `false` sends the native operations straight to the backend.
    pub abstraction: bool,
    /// Refinement steps for `bvmul`; each step is a group of stages emitted
    /// together.
    pub mul_steps: Vec<Vec<Stage>>,
    /// Refinement steps for the division and remainder operations.
    pub divrem_steps: Vec<Vec<Stage>>,
    pub fresh_symbols: FreshSymbolPolicy,
    pub signed_mode: SignedMode,
    /// Instances spawned at this depth or deeper do not spawn further
    /// instances of their own.
    pub spawn_depth_limit: u32,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            abstraction: true,
            mul_steps: vec![
                vec![Stage::Simple],
                vec![Stage::Intervals],
                vec![Stage::Relations],
                vec![Stage::FullMul],
            ],
            divrem_steps: vec![vec![Stage::Relations], vec![Stage::Full]],
            fresh_symbols: FreshSymbolPolicy::PerApplication,
            signed_mode: SignedMode::Signed,
            spawn_depth_limit: 1,
        }
    }
}

/// Names accepted by [`SchemeConfig::variant`].
pub const VARIANTS: &[&str] = &[
    "baseline", "step1", "step1-2", "step1-3", "full", "omit2", "merge23",
];

impl SchemeConfig {
    /// No abstraction at all.
    pub fn baseline() -> Self {
        SchemeConfig {
            abstraction: false,
            ..Default::default()
        }
    }

    /// The named variants of the multiplication ladder. Prefix variants keep
    /// only the first steps and are therefore not sound on their own.
    pub fn variant(name: &str) -> Result<Self, ConfigError> {
        let full = SchemeConfig::default();
        match name {
            "baseline" => Ok(Self::baseline()),
            "full" => Ok(full),
            "step1" => full.with_stages(&[Stage::Simple]),
            "step1-2" => full.with_stages(&[Stage::Simple, Stage::Intervals]),
            "step1-3" => full.with_stages(&[Stage::Simple, Stage::Intervals, Stage::Relations]),
            "omit2" => full.omit_step(2),
            "merge23" => full.merge_steps(2, 3),
            other => Err(ConfigError(format!(
                "unknown variant `{other}` (known: {})",
                VARIANTS.join(", ")
            ))),
        }
    }

    /// Replaces the multiplication ladder with one stage per step.
    pub fn with_stages(mut self, stages: &[Stage]) -> Result<Self, ConfigError> {
        self.mul_steps = stages.iter().map(|&s| vec![s]).collect();
        self.validate()?;
        Ok(self)
    }

    /// Drops multiplication step `n` (1-based).
    pub fn omit_step(mut self, n: usize) -> Result<Self, ConfigError> {
        if n == 0 || n > self.mul_steps.len() {
            return Err(ConfigError(format!("no step {n} to omit")));
        }
        self.mul_steps.remove(n - 1);
        self.validate()?;
        Ok(self)
    }

    /// Merges multiplication steps `a` and `b` (1-based, adjacent) into one.
    pub fn merge_steps(mut self, a: usize, b: usize) -> Result<Self, ConfigError> {
        let (a, b) = (a.min(b), a.max(b));
        if a == 0 || b != a + 1 || b > self.mul_steps.len() {
            return Err(ConfigError(format!("cannot merge steps {a} and {b}")));
        }
        let tail = self.mul_steps.remove(b - 1);
        self.mul_steps[a - 1].extend(tail);
        self.validate()?;
        Ok(self)
    }

    pub fn steps(&self, op: OpKind) -> &[Vec<Stage>] {
        match op {
            OpKind::Mul => &self.mul_steps,
            _ => &self.divrem_steps,
        }
    }

    /// True when the last step of `op`'s ladder forces exactness.
    pub fn is_sound(&self, op: OpKind) -> bool {
        let last = self.steps(op).last();
        match op {
            OpKind::Mul => {
                last.is_some_and(|s| s.contains(&Stage::FullMul) || s.contains(&Stage::Full))
            }
            _ => last.is_some_and(|s| s.contains(&Stage::Full)),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (what, steps, allowed) in [
            (
                "bvmul",
                &self.mul_steps,
                &[
                    Stage::Simple,
                    Stage::Intervals,
                    Stage::Relations,
                    Stage::FullMul,
                    Stage::Full,
                ][..],
            ),
            (
                "division/remainder",
                &self.divrem_steps,
                &[Stage::Relations, Stage::Full][..],
            ),
        ] {
            let flat: Vec<Stage> = steps.iter().flatten().copied().collect();
            for (i, s) in flat.iter().enumerate() {
                if !allowed.contains(s) {
                    return Err(ConfigError(format!("stage `{s}` does not apply to {what}")));
                }
                if flat[..i].contains(s) {
                    return Err(ConfigError(format!("stage `{s}` listed twice for {what}")));
                }
            }
            if steps.iter().any(Vec::is_empty) {
                return Err(ConfigError(format!("empty step for {what}")));
            }
            for (i, step) in steps.iter().enumerate() {
                let exact = step
                    .iter()
                    .any(|s| matches!(s, Stage::FullMul | Stage::Full));
                if exact && (i + 1 != steps.len() || step.len() != 1) {
                    return Err(ConfigError(format!(
                        "the exact stage must be the last step of {what} and cannot be merged"
                    )));
                }
            }
            if flat.contains(&Stage::FullMul) && flat.contains(&Stage::Full) {
                return Err(ConfigError("`full-mul` and `full` are alternatives".into()));
            }
        }
        Ok(())
    }
}
