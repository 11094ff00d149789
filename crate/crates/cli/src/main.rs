use std::process::ExitCode;

fn main() -> ExitCode {
    let out = alfven_cli::run_args(std::env::args_os().skip(1));
    if !out.summary.is_null() {
        print!("{}", alfven_cli::pretty(&out.summary));
    }
    if !out.message.is_empty() {
        eprintln!("{}", out.message.trim_end());
    }
    ExitCode::from(out.code.clamp(0, 255) as u8)
}
