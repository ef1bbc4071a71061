use std::collections::HashMap;
use crate::util::{a, b};

/// Sums values.
#[inline]
pub fn total(m: &HashMap<String, i32>) -> i32 {
    // fold
    m.values().sum()
}

/* outer /* nested */ still comment */
impl Foo {
    fn bar(&self) -> u8 { 1 }
}
