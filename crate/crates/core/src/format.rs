//! Number formatting shared by every file format: floats are written with 17
//! significant digits so that a value read back is bit-identical.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Formats `v` in scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// JSON formatter writing every `f64` with [`fmt_f64`].
pub struct Sig17Formatter<'a> {
    pretty: Option<PrettyFormatter<'a>>,
}

impl Sig17Formatter<'_> {
    pub fn compact() -> Self {
        Self { pretty: None }
    }

    pub fn pretty() -> Self {
        Self {
            pretty: Some(PrettyFormatter::new()),
        }
    }
}

macro_rules! delegate {
    ($( $name:ident ( $($arg:ident : $ty:ty),* ) ),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                match &mut self.pretty {
                    Some(p) => p.$name(w $(, $arg)*),
                    None => serde_json::ser::CompactFormatter.$name(w $(, $arg)*),
                }
            }
        )*
    };
}

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

/// Serialises `value` to JSON with 17-significant-digit floats.
///
/// Non-finite floats have no JSON representation; serde_json writes them as `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T, pretty: bool) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let formatter = if pretty {
        Sig17Formatter::pretty()
    } else {
        Sig17Formatter::compact()
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}
