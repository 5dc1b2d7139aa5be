//! Command-line front end. Placeholder until the full dispatcher lands.

pub fn run() -> i32 {
    eprintln!("not yet wired");
    1
}
