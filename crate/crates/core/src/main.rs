use std::io;

fn main() {
    let code = balpair::cli::main_with(std::env::args_os().skip(1), &mut io::stdin(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
