use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let (code, output) = opetope_cli::run(&refs);
    print!("{output}");
    ExitCode::from(code as u8)
}
