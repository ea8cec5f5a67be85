use std::process::ExitCode;

use dph::config::SEED_ENV;

fn main() -> ExitCode {
    let env_seed = std::env::var(SEED_ENV).ok();
    let out = dph::cli::run(std::env::args_os(), env_seed.as_deref());
    eprint!("{}", out.stderr);
    ExitCode::from(out.code)
}
