fn main() {
    // System OpenBLAS carries the LAPACK entry points used by src/linalg.rs.
    println!("cargo:rustc-link-lib=openblas");
    println!("cargo:rustc-link-search=native=/usr/lib/x86_64-linux-gnu");
}
