//! Validator for the JSON Schema subset used by `schema/wire.schema.json`:
//! `$ref` to local `$defs`, `oneOf`, `type`, `const`, `required`,
//! `properties`, `items`, `minimum`, `exclusiveMinimum`.

use serde_json::Value;

pub struct Schema {
    root: Value,
}

impl Schema {
    pub fn load() -> Self {
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/wire.schema.json");
        Schema {
            root: serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap(),
        }
    }

    pub fn is_valid(&self, v: &Value) -> bool {
        self.check(&self.root, v)
    }

    fn check(&self, s: &Value, v: &Value) -> bool {
        if let Some(r) = s.get("$ref").and_then(Value::as_str) {
            let name = r.strip_prefix("#/$defs/").expect("local ref");
            return self.check(&self.root["$defs"][name], v);
        }
        if let Some(alts) = s.get("oneOf").and_then(Value::as_array) {
            if alts.iter().filter(|a| self.check(a, v)).count() != 1 {
                return false;
            }
        }
        if let Some(t) = s.get("type").and_then(Value::as_str) {
            let ok = match t {
                "object" => v.is_object(),
                "array" => v.is_array(),
                "string" => v.is_string(),
                "number" => v.is_number(),
                "integer" => v.is_i64() || v.is_u64() || v.as_f64().is_some_and(|f| f.fract() == 0.0),
                _ => panic!("unsupported type {t}"),
            };
            if !ok {
                return false;
            }
        }
        if let Some(c) = s.get("const") {
            if v != c {
                return false;
            }
        }
        if let (Some(min), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
            if x < min {
                return false;
            }
        }
        if let (Some(min), Some(x)) = (s.get("exclusiveMinimum").and_then(Value::as_f64), v.as_f64()) {
            if x <= min {
                return false;
            }
        }
        if let (Some(req), Some(obj)) = (s.get("required").and_then(Value::as_array), v.as_object()) {
            if !req.iter().all(|k| obj.contains_key(k.as_str().unwrap())) {
                return false;
            }
        }
        if let (Some(props), Some(obj)) = (s.get("properties").and_then(Value::as_object), v.as_object()) {
            for (k, sub) in props {
                if let Some(x) = obj.get(k) {
                    if !self.check(sub, x) {
                        return false;
                    }
                }
            }
        }
        if let (Some(items), Some(arr)) = (s.get("items"), v.as_array()) {
            if !arr.iter().all(|x| self.check(items, x)) {
                return false;
            }
        }
        true
    }
}
