use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(n) = std::env::var("CONVINEQ_THREADS") {
        match n.parse::<usize>() {
            Ok(n) => {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            Err(_) => log::warn!("ignoring CONVINEQ_THREADS={n:?}: not a count"),
        }
    }
    match convineq_cli::run(std::env::args_os()) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(&outcome.stdout)
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(convineq_cli::EXIT_ERROR as u8);
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("{}", convineq_cli::error_line(&e));
            ExitCode::from(convineq_cli::EXIT_ERROR as u8)
        }
    }
}
