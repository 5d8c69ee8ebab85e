use std::io::Write;

fn main() {
    let (code, stdout, stderr) = kgr::cli::run_command(std::env::args_os());
    std::io::stdout().write_all(stdout.as_bytes()).ok();
    std::io::stderr().write_all(stderr.as_bytes()).ok();
    std::process::exit(code);
}
