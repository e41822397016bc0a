//! Writes a partial specification and its completed map as JSON and reads
//! them back unchanged.

use lebesgue_circle::io::{map_from_json, map_to_json, spec_from_json, spec_to_json};
use lebesgue_circle::{extension, Branch, Interval, PartialMapSpec, Result};

fn main() -> Result<()> {
    let known = Branch::sine_perturbed(Interval::new(0.0, 0.5)?, 2.0, 0.1, 1.0);
    let spec = PartialMapSpec::new(vec![0.0, 0.5, 1.0], 2, vec![known])?;
    let spec_text = spec_to_json(&spec)?;
    println!("{spec_text}");
    assert_eq!(spec_to_json(&spec_from_json(&spec_text)?)?, spec_text);

    let map = extension::assemble_circle_map(&spec, 1e-3)?;
    let text = map_to_json(&map)?;
    println!("{text}");
    let back = map_from_json(&text)?;
    assert_eq!(map_to_json(&back)?, text);
    for x in [0.1, 0.6, 0.9] {
        assert_eq!(map.eval(x)?, back.eval(x)?);
    }
    println!("round trip is exact");
    Ok(())
}
