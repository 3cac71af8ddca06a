use std::process;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut stdout = std::io::stdout().lock();
    if let Err(err) = wbrier::cli::run(std::env::args_os(), &mut stdout) {
        if err.code == 0 {
            print!("{err}");
        } else {
            eprintln!("wbrier: {}", err.message.trim_end());
        }
        process::exit(err.code);
    }
}
