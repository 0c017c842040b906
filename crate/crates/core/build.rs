fn main() {
    // ndarray-linalg is used without a bundled BLAS backend; link the system
    // OpenBLAS (which also provides LAPACK) instead.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
