fn main() {
    // Populated once the library surface is complete.
}
