fn main() {
    println!("penbm");
}
