//! Parallelism cap from the environment.

use anyhow::{bail, Context};

pub const THREADS_ENV: &str = "NLS_LAB_THREADS";

fn parse(value: &str) -> anyhow::Result<usize> {
    let n: usize = value.trim().parse().with_context(|| format!("{THREADS_ENV}={value:?} is not an integer"))?;
    if n == 0 {
        bail!("{THREADS_ENV} must be at least 1");
    }
    Ok(n)
}

/// Size the global rayon pool from `NLS_LAB_THREADS` if set. Returns the
/// number of worker threads in use.
pub fn init_threads() -> anyhow::Result<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n = parse(&v)?;
        // a pool built earlier in the process wins; report what is actually used
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_counts() {
        assert_eq!(parse(" 4 ").unwrap(), 4);
        assert!(parse("0").is_err());
        assert!(parse("many").is_err());
    }
}
