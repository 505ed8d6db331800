//! JSON has no infinity literal; moments are written as numbers or `"inf"`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Moment {
    Number(f64),
    Text(String),
}

impl Moment {
    fn from_f64(p: f64) -> Self {
        if p == f64::INFINITY {
            Moment::Text("inf".into())
        } else {
            Moment::Number(p)
        }
    }

    fn into_f64<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            Moment::Number(p) => Ok(p),
            Moment::Text(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                _ => s.parse().map_err(|_| E::custom(format!("invalid moment `{s}`"))),
            },
        }
    }
}

/// Parses a moment from the command line or a config string.
pub fn parse_moment(s: &str) -> Result<f64, String> {
    Moment::Text(s.to_string()).into_f64::<serde::de::value::Error>().map_err(|e| e.to_string())
}

pub mod moment {
    use super::*;

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
        Moment::from_f64(*p).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Moment::deserialize(d)?.into_f64()
    }
}

pub mod moment_list {
    use super::*;

    pub fn serialize<S: Serializer>(ps: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let list: Vec<Moment> = ps.iter().map(|&p| Moment::from_f64(p)).collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Moment>::deserialize(d)?.into_iter().map(Moment::into_f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder {
        #[serde(with = "moment")]
        p: f64,
        #[serde(with = "moment_list")]
        ps: Vec<f64>,
    }

    #[test]
    fn infinity_round_trips() {
        let h = Holder { p: f64::INFINITY, ps: vec![2.0, f64::INFINITY] };
        let text = serde_json::to_string(&h).unwrap();
        assert_eq!(text, r#"{"p":"inf","ps":[2.0,"inf"]}"#);
        assert_eq!(serde_json::from_str::<Holder>(&text).unwrap(), h);
        assert_eq!(parse_moment("10").unwrap(), 10.0);
        assert!(parse_moment("ten").is_err());
    }
}
