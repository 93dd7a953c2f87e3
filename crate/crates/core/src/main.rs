mod cli;

use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("MONTESINOS_LOG")).init();
    // Usage errors share exit code 1 with other input errors; 2 means "residual family".
    let parsed = match cli::Cli::try_parse() {
        Ok(parsed) => parsed,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() {
                cli::EXIT_ERROR
            } else {
                cli::EXIT_OK
            });
        }
    };
    let code = match cli::run(parsed) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            cli::EXIT_ERROR
        }
    };
    std::process::exit(code);
}
