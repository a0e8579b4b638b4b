//! Writing and reading MatrixMarket files, and what a bad file reports.

use lrd::instances::sample_uniform;
use lrd::io;
use lrd::{DenseMatrix, LrdError, Rng};

fn main() -> lrd::Result<()> {
    let m = DenseMatrix::gaussian(3, 2, &mut Rng::new(1));
    let text = io::format_dense(&m);
    print!("{text}");
    assert_eq!(io::parse_dense(&text)?, m);

    let obs = sample_uniform(3, 2, 3, 4)?;
    print!("{}", io::format_entries(&m, &obs)?);

    let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
    match io::parse_dense(&truncated) {
        Err(LrdError::Parse { line, column, message }) => println!("line {line}, column {column}: {message}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
