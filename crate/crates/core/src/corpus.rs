//! Example programs bundled with the crate.

use crate::parser::parse_program;
use crate::term::Program;

pub const FAMILY: &str = include_str!("../corpus/family.pl");
pub const PEANO: &str = include_str!("../corpus/peano.pl");
pub const LISTS: &str = include_str!("../corpus/lists.pl");
pub const PATH: &str = include_str!("../corpus/path.pl");
pub const LATIN: &str = include_str!("../corpus/latin.pl");

/// A Latin-square puzzle with six givens for [`LATIN`].
pub const LATIN_PUZZLE: &str = "square(a,b,C,D, E,F,d,H, c,J,K,b, M,N,O,a)";

/// Name and source of every bundled program.
pub const ALL: [(&str, &str); 5] = [
    ("family", FAMILY),
    ("peano", PEANO),
    ("lists", LISTS),
    ("path", PATH),
    ("latin", LATIN),
];

pub fn load(name: &str) -> Option<Program> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse_program(src).expect("bundled programs parse"))
}
