//! Prints the bit strings of the three integer code families and shows a
//! round trip through the bit reader.

use llp_core::codes::{BitReader, BitWriter, Code};

fn main() -> llp_core::Result<()> {
    let codes = [Code::Gamma, Code::Delta, Code::Zeta(2), Code::Zeta(3)];
    print!("{:>6}", "x");
    for c in &codes {
        print!("  {c:>14}");
    }
    println!();
    for x in [1u64, 2, 3, 4, 7, 8, 15, 16, 100, 1000] {
        print!("{x:>6}");
        for c in &codes {
            print!("  {:>14}", c.encode(x)?);
        }
        println!();
    }

    let values: Vec<u64> = (1..=2000).collect();
    for c in codes {
        let mut w = BitWriter::new();
        for &v in &values {
            c.write(&mut w, v);
        }
        let len = w.len();
        let words = w.into_words();
        let mut r = BitReader::new(&words, len);
        let back: Vec<u64> = values.iter().map(|_| c.read(&mut r)).collect();
        assert_eq!(back, values);
        println!(
            "{c}: 1..=2000 in {len} bits ({:.2} bits/value)",
            len as f64 / values.len() as f64
        );
    }
    Ok(())
}
