use std::process::ExitCode;

fn main() -> ExitCode {
    let (res, as_json) = regcover::cli::run_command(std::env::args_os());
    let text = res.output(as_json);
    if res.code == regcover::cli::EXIT_ERROR && !as_json {
        eprint!("{text}");
        if !text.ends_with('\n') {
            eprintln!();
        }
    } else {
        print!("{text}");
        if !text.ends_with('\n') {
            println!();
        }
    }
    ExitCode::from(res.code as u8)
}
