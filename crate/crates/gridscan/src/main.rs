fn main() {
    println!("gridscan");
}
