use std::fmt::Display;

/// Bad flags, flag values or configuration files.
pub const EXIT_USAGE: u8 = 1;
/// Unreadable or invalid input data.
pub const EXIT_INPUT: u8 = 2;
/// A broken internal invariant.
pub const EXIT_INTERNAL: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(message: impl Display) -> Self {
        Self {
            code: EXIT_USAGE,
            error: anyhow::anyhow!("{message}"),
        }
    }

    pub fn input(message: impl Display) -> Self {
        Self {
            code: EXIT_INPUT,
            error: anyhow::anyhow!("{message}"),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

/// Attaches an exit code and context to foreign errors.
pub trait Classify<T> {
    fn or_usage(self, context: impl Display) -> Outcome<T>;
    fn or_input(self, context: impl Display) -> Outcome<T>;
    fn or_internal(self, context: impl Display) -> Outcome<T>;
}

impl<T, E> Classify<T> for Result<T, E>
where
    E: Into<anyhow::Error>,
{
    fn or_usage(self, context: impl Display) -> Outcome<T> {
        self.map_err(|e| wrap(EXIT_USAGE, e.into(), context))
    }

    fn or_input(self, context: impl Display) -> Outcome<T> {
        self.map_err(|e| wrap(EXIT_INPUT, e.into(), context))
    }

    fn or_internal(self, context: impl Display) -> Outcome<T> {
        self.map_err(|e| wrap(EXIT_INTERNAL, e.into(), context))
    }
}

fn wrap(code: u8, error: anyhow::Error, context: impl Display) -> Failure {
    Failure {
        code,
        error: error.context(context.to_string()),
    }
}
