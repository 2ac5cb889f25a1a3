use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{LanguageId, SigError};

/// Language-neutral type carried through signature translation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Int,
    Long,
    Float,
    Double,
    Bool,
    Str,
    Char,
    List(Box<TypeRef>),
    Map(Box<TypeRef>, Box<TypeRef>),
    Optional(Box<TypeRef>),
    Tuple(Vec<TypeRef>),
    /// Source text of a type with no mapping, kept verbatim.
    Opaque(String),
}

/// Where a type appears; some languages only allow certain shapes in certain slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypeSlot {
    Param,
    Return,
    Nested,
}

impl TypeRef {
    pub fn list(inner: TypeRef) -> Self {
        TypeRef::List(Box::new(inner))
    }

    pub fn map(key: TypeRef, value: TypeRef) -> Self {
        TypeRef::Map(Box::new(key), Box::new(value))
    }

    pub fn optional(inner: TypeRef) -> Self {
        TypeRef::Optional(Box::new(inner))
    }

    pub fn opaque(text: impl Into<String>) -> Self {
        TypeRef::Opaque(text.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TypeRef::Int => "Int",
            TypeRef::Long => "Long",
            TypeRef::Float => "Float",
            TypeRef::Double => "Double",
            TypeRef::Bool => "Bool",
            TypeRef::Str => "Str",
            TypeRef::Char => "Char",
            TypeRef::List(_) => "List",
            TypeRef::Map(_, _) => "Map",
            TypeRef::Optional(_) => "Optional",
            TypeRef::Tuple(_) => "Tuple",
            TypeRef::Opaque(_) => "Opaque",
        }
    }

    pub fn args(&self) -> Vec<&TypeRef> {
        match self {
            TypeRef::List(t) | TypeRef::Optional(t) => vec![t],
            TypeRef::Map(k, v) => vec![k, v],
            TypeRef::Tuple(ts) => ts.iter().collect(),
            _ => Vec::new(),
        }
    }

    /// True if this type or any child is `Opaque`.
    pub fn contains_opaque(&self) -> bool {
        match self {
            TypeRef::Opaque(_) => true,
            other => other.args().into_iter().any(TypeRef::contains_opaque),
        }
    }

    /// Structural well-formedness: tuples have at least two members, opaque text is non-empty.
    pub fn is_well_formed(&self) -> bool {
        match self {
            TypeRef::Tuple(ts) => ts.len() >= 2 && ts.iter().all(TypeRef::is_well_formed),
            TypeRef::Opaque(text) => !text.trim().is_empty(),
            other => other.args().into_iter().all(TypeRef::is_well_formed),
        }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Opaque(text) => write!(f, "Opaque({text})"),
            other => {
                let args = other.args();
                if args.is_empty() {
                    f.write_str(other.kind())
                } else {
                    write!(f, "{}(", other.kind())?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TypeRefRepr {
    kind: String,
    #[serde(default)]
    args: Vec<TypeRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

impl Serialize for TypeRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = TypeRefRepr {
            kind: self.kind().to_string(),
            args: self.args().into_iter().cloned().collect(),
            text: match self {
                TypeRef::Opaque(t) => Some(t.clone()),
                _ => None,
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TypeRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = TypeRefRepr::deserialize(deserializer)?;
        let mut args = repr.args.into_iter();
        let mut take = |n: usize| -> Result<Vec<TypeRef>, D::Error> {
            let v: Vec<_> = args.by_ref().collect();
            if v.len() != n {
                return Err(D::Error::custom(format!(
                    "type {} expects {n} args, got {}",
                    repr.kind,
                    v.len()
                )));
            }
            Ok(v)
        };
        let ty = match repr.kind.as_str() {
            "Int" => {
                take(0)?;
                TypeRef::Int
            }
            "Long" => {
                take(0)?;
                TypeRef::Long
            }
            "Float" => {
                take(0)?;
                TypeRef::Float
            }
            "Double" => {
                take(0)?;
                TypeRef::Double
            }
            "Bool" => {
                take(0)?;
                TypeRef::Bool
            }
            "Str" => {
                take(0)?;
                TypeRef::Str
            }
            "Char" => {
                take(0)?;
                TypeRef::Char
            }
            "List" => TypeRef::list(take(1)?.remove(0)),
            "Optional" => TypeRef::optional(take(1)?.remove(0)),
            "Map" => {
                let mut kv = take(2)?;
                let v = kv.pop().unwrap();
                let k = kv.pop().unwrap();
                TypeRef::map(k, v)
            }
            "Tuple" => {
                let v: Vec<_> = args.collect();
                if v.len() < 2 {
                    return Err(D::Error::custom("Tuple needs at least two members"));
                }
                TypeRef::Tuple(v)
            }
            "Opaque" => TypeRef::Opaque(
                repr.text
                    .ok_or_else(|| D::Error::custom("Opaque type requires `text`"))?,
            ),
            other => return Err(D::Error::custom(format!("unknown type kind `{other}`"))),
        };
        Ok(ty)
    }
}

// ---------------------------------------------------------------------------
// Canonical projection

/// Project a type onto the subset of the lattice `lang` can express.
///
/// `Ok(None)` means the language spells it as "no type" (untyped languages).
/// `Err` means the shape has no spelling in `lang` at this slot.
pub fn canonical_type(
    lang: LanguageId,
    ty: &TypeRef,
    slot: TypeSlot,
) -> Result<Option<TypeRef>, SigError> {
    if lang.is_untyped() {
        return Ok(None);
    }
    canonical_typed(lang, ty, slot).map(Some)
}

fn canonical_typed(lang: LanguageId, ty: &TypeRef, slot: TypeSlot) -> Result<TypeRef, SigError> {
    use LanguageId as L;
    let unrenderable = || SigError::UnrenderableType {
        language: lang,
        ty: ty.to_string(),
    };
    let nested = |t: &TypeRef| canonical_typed(lang, t, TypeSlot::Nested);
    let out = match ty {
        TypeRef::Opaque(text) => TypeRef::Opaque(text.clone()),
        TypeRef::Int => match lang {
            L::TypeScript => TypeRef::Double,
            _ => TypeRef::Int,
        },
        TypeRef::Long => match lang {
            L::Python | L::PHP => TypeRef::Int,
            L::TypeScript => TypeRef::Double,
            _ => TypeRef::Long,
        },
        TypeRef::Float => match lang {
            L::Python | L::PHP | L::TypeScript => TypeRef::Double,
            _ => TypeRef::Float,
        },
        TypeRef::Double => TypeRef::Double,
        TypeRef::Bool => TypeRef::Bool,
        TypeRef::Str => TypeRef::Str,
        TypeRef::Char => match lang {
            L::Python | L::PHP | L::TypeScript => TypeRef::Str,
            _ => TypeRef::Char,
        },
        TypeRef::List(inner) => match lang {
            L::PHP => TypeRef::opaque("array"),
            _ => TypeRef::list(nested(inner)?),
        },
        TypeRef::Map(k, v) => match lang {
            L::PHP => TypeRef::opaque("array"),
            _ => TypeRef::map(nested(k)?, nested(v)?),
        },
        TypeRef::Tuple(members) => {
            if members.len() < 2 {
                return Err(unrenderable());
            }
            match lang {
                L::Java => return Err(unrenderable()),
                L::Go if slot != TypeSlot::Return => return Err(unrenderable()),
                L::Kotlin if members.len() > 3 => return Err(unrenderable()),
                L::PHP => TypeRef::opaque("array"),
                _ => TypeRef::Tuple(members.iter().map(nested).collect::<Result<_, _>>()?),
            }
        }
        TypeRef::Optional(inner) => {
            let inner = nested(inner)?;
            let collapses = matches!(
                lang,
                L::CSharp | L::Kotlin | L::TypeScript | L::PHP
            );
            match inner {
                TypeRef::Optional(_) if collapses => inner,
                other => TypeRef::optional(other),
            }
        }
    };
    Ok(out)
}

// ---------------------------------------------------------------------------
// Rendering

/// Spelling used for a parameter with no type; `None` means the annotation is omitted.
pub(crate) fn dynamic_param_spelling(lang: LanguageId) -> Option<&'static str> {
    match lang {
        LanguageId::Java => Some("Object"),
        LanguageId::CSharp => Some("object"),
        LanguageId::Kotlin => Some("Any?"),
        LanguageId::Scala | LanguageId::Swift => Some("Any"),
        LanguageId::Go => Some("any"),
        _ => None,
    }
}

/// Spelling used for an absent return type; `None` means the return annotation is omitted.
pub(crate) fn dynamic_return_spelling(lang: LanguageId) -> Option<&'static str> {
    match lang {
        LanguageId::Java => Some("Object"),
        LanguageId::CSharp => Some("object"),
        _ => None,
    }
}

/// Render a type in `lang`'s surface syntax. Returns `Ok(None)` for untyped languages.
pub fn render_type(
    lang: LanguageId,
    ty: &TypeRef,
    slot: TypeSlot,
) -> Result<Option<String>, SigError> {
    Ok(canonical_type(lang, ty, slot)?.map(|c| render_canonical(lang, &c, slot)))
}

fn render_canonical(lang: LanguageId, ty: &TypeRef, slot: TypeSlot) -> String {
    use LanguageId as L;
    let nested = |t: &TypeRef| render_canonical(lang, t, TypeSlot::Nested);
    let boxed = lang == L::Java && slot == TypeSlot::Nested;
    match ty {
        TypeRef::Opaque(text) => text.clone(),
        TypeRef::Int => match lang {
            L::Java if boxed => "Integer",
            L::Go | L::CSharp | L::Java | L::PHP => "int",
            L::Python => "int",
            _ => "Int",
        }
        .to_string(),
        TypeRef::Long => match lang {
            L::Java if boxed => "Long",
            L::Go => "int64",
            L::CSharp | L::Java => "long",
            L::Swift => "Int64",
            _ => "Long",
        }
        .to_string(),
        TypeRef::Float => match lang {
            L::Java if boxed => "Float",
            L::Go => "float32",
            L::CSharp | L::Java => "float",
            _ => "Float",
        }
        .to_string(),
        TypeRef::Double => match lang {
            L::Java if boxed => "Double",
            L::Go => "float64",
            L::CSharp | L::Java => "double",
            L::Python | L::PHP => "float",
            L::TypeScript => "number",
            _ => "Double",
        }
        .to_string(),
        TypeRef::Bool => match lang {
            L::Java if boxed => "Boolean",
            L::Java | L::TypeScript => "boolean",
            L::Go | L::CSharp | L::Python | L::PHP => "bool",
            L::Kotlin | L::Scala => "Boolean",
            _ => "Bool",
        }
        .to_string(),
        TypeRef::Str => match lang {
            L::Go | L::CSharp | L::TypeScript | L::PHP => "string",
            L::Python => "str",
            _ => "String",
        }
        .to_string(),
        TypeRef::Char => match lang {
            L::Java if boxed => "Character",
            L::Java | L::CSharp => "char",
            L::Go => "rune",
            L::Swift => "Character",
            _ => "Char",
        }
        .to_string(),
        TypeRef::List(inner) => {
            let i = nested(inner);
            match lang {
                L::Python => format!("List[{i}]"),
                L::Scala => format!("List[{i}]"),
                L::Go => format!("[]{i}"),
                L::Swift => format!("[{i}]"),
                L::TypeScript => {
                    if matches!(**inner, TypeRef::Optional(_)) {
                        format!("({i})[]")
                    } else {
                        format!("{i}[]")
                    }
                }
                _ => format!("List<{i}>"),
            }
        }
        TypeRef::Map(k, v) => {
            let (k, v) = (nested(k), nested(v));
            match lang {
                L::Python => format!("Dict[{k}, {v}]"),
                L::Scala => format!("Map[{k}, {v}]"),
                L::Go => format!("map[{k}]{v}"),
                L::Swift => format!("[{k}: {v}]"),
                L::CSharp => format!("Dictionary<{k}, {v}>"),
                _ => format!("Map<{k}, {v}>"),
            }
        }
        TypeRef::Optional(inner) => {
            let i = nested(inner);
            match lang {
                L::Python => format!("Optional[{i}]"),
                L::Scala => format!("Option[{i}]"),
                L::Java => format!("Optional<{i}>"),
                L::Go => format!("*{i}"),
                L::TypeScript => format!("{i} | null"),
                L::PHP => format!("?{i}"),
                _ => format!("{i}?"),
            }
        }
        TypeRef::Tuple(members) => {
            let parts: Vec<String> = members.iter().map(nested).collect();
            let joined = parts.join(", ");
            match lang {
                L::Python => format!("Tuple[{joined}]"),
                L::TypeScript => format!("[{joined}]"),
                L::Kotlin if parts.len() == 2 => format!("Pair<{joined}>"),
                L::Kotlin => format!("Triple<{joined}>"),
                _ => format!("({joined})"),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tk {
    Ident,
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone, Copy)]
struct Token {
    kind: Tk,
    start: usize,
    end: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.' || c == '\\'
}

fn lex(src: &str) -> Vec<Token> {
    let mut toks = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if is_ident_char(c) {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if is_ident_char(d) {
                    end = j + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            toks.push(Token {
                kind: Tk::Ident,
                start: i,
                end,
            });
        } else if (c == '-' || c == '=') && matches!(chars.peek(), Some(&(_, '>'))) {
            chars.next();
            toks.push(Token {
                kind: Tk::Arrow,
                start: i,
                end: i + 2,
            });
        } else {
            toks.push(Token {
                kind: Tk::Sym(c),
                start: i,
                end: i + c.len_utf8(),
            });
        }
    }
    toks
}

/// Intermediate parse result: a real type, the language's dynamic spelling, or a null marker.
#[derive(Debug, Clone)]
enum P {
    Ty(TypeRef),
    Dyn,
    Null,
}

struct TypeParser<'a> {
    lang: LanguageId,
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

type PResult = Result<(P, usize, usize), ()>;

impl<'a> TypeParser<'a> {
    fn peek(&self) -> Option<Tk> {
        self.toks.get(self.pos).map(|t| t.kind)
    }

    fn peek_at(&self, k: usize) -> Option<Tk> {
        self.toks.get(self.pos + k).map(|t| t.kind)
    }

    fn eat(&mut self, sym: char) -> bool {
        if self.peek() == Some(Tk::Sym(sym)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: char) -> Result<usize, ()> {
        if self.peek() == Some(Tk::Sym(sym)) {
            let end = self.toks[self.pos].end;
            self.pos += 1;
            Ok(end)
        } else {
            Err(())
        }
    }

    fn start(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.start).unwrap_or(self.src.len())
    }

    fn text(&self, start: usize, end: usize) -> String {
        self.src[start..end].trim().to_string()
    }

    /// Convert a parse result into a child type; dynamic or null spellings become opaque text.
    fn as_child(&self, r: (P, usize, usize)) -> TypeRef {
        match r.0 {
            P::Ty(t) => t,
            P::Dyn | P::Null => TypeRef::Opaque(self.text(r.1, r.2)),
        }
    }

    fn child(&mut self) -> Result<TypeRef, ()> {
        let r = self.parse_type(TypeSlot::Nested)?;
        Ok(self.as_child(r))
    }

    fn list_until(&mut self, close: char) -> Result<(Vec<TypeRef>, usize), ()> {
        let mut items = Vec::new();
        if let Some(Tk::Sym(c)) = self.peek() {
            if c == close {
                let end = self.expect(close)?;
                return Ok((items, end));
            }
        }
        loop {
            items.push(self.child()?);
            if self.eat(',') {
                continue;
            }
            let end = self.expect(close)?;
            return Ok((items, end));
        }
    }

    fn parse_type(&mut self, slot: TypeSlot) -> PResult {
        match self.lang {
            LanguageId::TypeScript => self.parse_ts_union(),
            _ => {
                let r = self.parse_prefixed(slot)?;
                self.parse_postfix(r)
            }
        }
    }

    fn parse_ts_union(&mut self) -> PResult {
        let first = self.parse_prefixed(TypeSlot::Nested)?;
        let first = self.parse_postfix(first)?;
        if self.peek() != Some(Tk::Sym('|')) {
            return Ok(first);
        }
        let start = first.1;
        let mut members = vec![first];
        while self.eat('|') {
            let m = self.parse_prefixed(TypeSlot::Nested)?;
            members.push(self.parse_postfix(m)?);
        }
        let end = members.last().map(|m| m.2).unwrap_or(start);
        let non_null: Vec<_> = members
            .iter()
            .filter(|m| !matches!(m.0, P::Null))
            .cloned()
            .collect();
        if non_null.len() == 1 && members.len() > 1 {
            let inner = non_null.into_iter().next().unwrap();
            return Ok(match inner.0 {
                P::Dyn => (P::Dyn, start, end),
                _ => (P::Ty(TypeRef::optional(self.as_child(inner))), start, end),
            });
        }
        Ok((P::Ty(TypeRef::Opaque(self.text(start, end))), start, end))
    }

    fn parse_prefixed(&mut self, slot: TypeSlot) -> PResult {
        use LanguageId as L;
        let start = self.start();
        match (self.lang, self.peek()) {
            (L::Go, Some(Tk::Sym('['))) => {
                self.pos += 1;
                self.expect(']')?;
                let inner = self.parse_type(TypeSlot::Nested)?;
                let end = inner.2;
                Ok((P::Ty(TypeRef::list(self.as_child(inner))), start, end))
            }
            (L::Go, Some(Tk::Sym('*'))) => {
                self.pos += 1;
                let inner = self.parse_type(TypeSlot::Nested)?;
                let end = inner.2;
                Ok((P::Ty(TypeRef::optional(self.as_child(inner))), start, end))
            }
            (L::Go, Some(Tk::Sym('('))) if slot == TypeSlot::Return => {
                self.pos += 1;
                let (items, end) = self.list_until(')')?;
                match items.len() {
                    0 => Err(()),
                    1 => Ok((P::Ty(items.into_iter().next().unwrap()), start, end)),
                    _ => Ok((P::Ty(TypeRef::Tuple(items)), start, end)),
                }
            }
            (L::PHP, Some(Tk::Sym('?'))) => {
                self.pos += 1;
                let inner = self.parse_prefixed(TypeSlot::Nested)?;
                let end = inner.2;
                Ok(match inner.0 {
                    P::Dyn => (P::Dyn, start, end),
                    _ => (P::Ty(TypeRef::optional(self.as_child(inner))), start, end),
                })
            }
            (L::Swift, Some(Tk::Sym('['))) => {
                self.pos += 1;
                let first = self.child()?;
                if self.eat(':') {
                    let value = self.child()?;
                    let end = self.expect(']')?;
                    Ok((P::Ty(TypeRef::map(first, value)), start, end))
                } else {
                    let end = self.expect(']')?;
                    Ok((P::Ty(TypeRef::list(first)), start, end))
                }
            }
            (L::TypeScript, Some(Tk::Sym('['))) => {
                self.pos += 1;
                let (items, end) = self.list_until(']')?;
                if items.len() < 2 {
                    return Ok((P::Ty(TypeRef::Opaque(self.text(start, end))), start, end));
                }
                Ok((P::Ty(TypeRef::Tuple(items)), start, end))
            }
            (L::TypeScript, Some(Tk::Sym('('))) => {
                self.pos += 1;
                let inner = self.parse_ts_union()?;
                let end = self.expect(')')?;
                Ok((inner.0, start, end))
            }
            (L::CSharp | L::Swift | L::Scala, Some(Tk::Sym('('))) => {
                self.pos += 1;
                let (items, end) = self.list_until(')')?;
                match items.len() {
                    0 => Err(()),
                    1 if self.lang == L::Swift => {
                        Ok((P::Ty(items.into_iter().next().unwrap()), start, end))
                    }
                    1 => Err(()),
                    _ => Ok((P::Ty(TypeRef::Tuple(items)), start, end)),
                }
            }
            (_, Some(Tk::Ident)) => self.parse_named(),
            _ => Err(()),
        }
    }

    fn parse_named(&mut self) -> PResult {
        use LanguageId as L;
        let tok = self.toks[self.pos];
        self.pos += 1;
        let name = &self.src[tok.start..tok.end];
        let start = tok.start;

        if self.lang == L::Go && name == "map" && self.peek() == Some(Tk::Sym('[')) {
            self.pos += 1;
            let key = self.child()?;
            self.expect(']')?;
            let value = self.parse_type(TypeSlot::Nested)?;
            let end = value.2;
            return Ok((P::Ty(TypeRef::map(key, self.as_child(value))), start, end));
        }
        if self.lang == L::Go
            && name == "interface"
            && self.peek() == Some(Tk::Sym('{'))
            && self.peek_at(1) == Some(Tk::Sym('}'))
        {
            self.pos += 1;
            let end = self.expect('}')?;
            return Ok((P::Dyn, start, end));
        }

        let open = match self.lang {
            L::Python | L::Scala | L::Go => '[',
            _ => '<',
        };
        let close = if open == '[' { ']' } else { '>' };
        // `T[]` in TypeScript is a postfix list, not a generic argument list.
        let generic = self.peek() == Some(Tk::Sym(open))
            && !(open == '[' && self.peek_at(1) == Some(Tk::Sym(']')));
        if generic {
            self.pos += 1;
            let (args, end) = self.list_until(close)?;
            let ty = generic_type(self.lang, name, args)
                .unwrap_or_else(|| TypeRef::Opaque(self.text(start, end)));
            return Ok((P::Ty(ty), start, end));
        }
        let end = tok.end;
        let p = scalar_type(self.lang, name).unwrap_or_else(|| P::Ty(TypeRef::opaque(name)));
        Ok((p, start, end))
    }

    fn parse_postfix(&mut self, mut cur: (P, usize, usize)) -> PResult {
        use LanguageId as L;
        loop {
            match (self.lang, self.peek()) {
                (L::Java | L::CSharp | L::TypeScript, Some(Tk::Sym('[')))
                    if self.peek_at(1) == Some(Tk::Sym(']')) =>
                {
                    self.pos += 1;
                    let end = self.expect(']')?;
                    let child = self.as_child(cur.clone());
                    cur = (P::Ty(TypeRef::list(child)), cur.1, end);
                }
                (L::CSharp | L::Kotlin | L::Swift, Some(Tk::Sym('?'))) => {
                    let end = self.expect('?')?;
                    cur = match cur.0 {
                        P::Dyn => (P::Dyn, cur.1, end),
                        P::Null => return Err(()),
                        P::Ty(ref t) => {
                            let collapse =
                                matches!(t, TypeRef::Optional(_)) && self.lang != L::Swift;
                            if collapse {
                                (P::Ty(t.clone()), cur.1, end)
                            } else {
                                (P::Ty(TypeRef::optional(t.clone())), cur.1, end)
                            }
                        }
                    };
                }
                _ => return Ok(cur),
            }
        }
    }
}

fn scalar_type(lang: LanguageId, name: &str) -> Option<P> {
    use LanguageId as L;
    use TypeRef as T;
    let t = |t: TypeRef| Some(P::Ty(t));
    match lang {
        L::Python => match name {
            "int" => t(T::Int),
            "float" => t(T::Double),
            "bool" => t(T::Bool),
            "str" => t(T::Str),
            "Any" => Some(P::Dyn),
            _ => None,
        },
        L::Go => match name {
            "int" => t(T::Int),
            "int64" => t(T::Long),
            "float32" => t(T::Float),
            "float64" => t(T::Double),
            "bool" => t(T::Bool),
            "string" => t(T::Str),
            "rune" => t(T::Char),
            "any" => Some(P::Dyn),
            _ => None,
        },
        L::Java => match name {
            "int" | "Integer" => t(T::Int),
            "long" | "Long" => t(T::Long),
            "float" | "Float" => t(T::Float),
            "double" | "Double" => t(T::Double),
            "boolean" | "Boolean" => t(T::Bool),
            "String" => t(T::Str),
            "char" | "Character" => t(T::Char),
            "Object" => Some(P::Dyn),
            _ => None,
        },
        L::CSharp => match name {
            "int" | "Int32" => t(T::Int),
            "long" | "Int64" => t(T::Long),
            "float" | "Single" => t(T::Float),
            "double" | "Double" => t(T::Double),
            "bool" | "Boolean" => t(T::Bool),
            "string" | "String" => t(T::Str),
            "char" | "Char" => t(T::Char),
            "object" | "Object" => Some(P::Dyn),
            _ => None,
        },
        L::Kotlin | L::Scala => match name {
            "Int" => t(T::Int),
            "Long" => t(T::Long),
            "Float" => t(T::Float),
            "Double" => t(T::Double),
            "Boolean" => t(T::Bool),
            "String" => t(T::Str),
            "Char" => t(T::Char),
            "Any" => Some(P::Dyn),
            _ => None,
        },
        L::Swift => match name {
            "Int" => t(T::Int),
            "Int64" => t(T::Long),
            "Float" => t(T::Float),
            "Double" => t(T::Double),
            "Bool" => t(T::Bool),
            "String" => t(T::Str),
            "Character" => t(T::Char),
            "Any" => Some(P::Dyn),
            _ => None,
        },
        L::TypeScript => match name {
            "number" => t(T::Double),
            "boolean" => t(T::Bool),
            "string" => t(T::Str),
            "any" | "unknown" => Some(P::Dyn),
            "null" | "undefined" => Some(P::Null),
            _ => None,
        },
        L::PHP => match name {
            "int" => t(T::Int),
            "float" => t(T::Double),
            "bool" => t(T::Bool),
            "string" => t(T::Str),
            "mixed" => Some(P::Dyn),
            _ => None,
        },
        L::JavaScript | L::Ruby | L::Perl => None,
    }
}

fn generic_type(lang: LanguageId, name: &str, mut args: Vec<TypeRef>) -> Option<TypeRef> {
    use LanguageId as L;
    let n = args.len();
    let one = |args: &mut Vec<TypeRef>| args.pop();
    let kind = match (lang, name) {
        (L::Python, "List" | "list") => "list",
        (L::Python, "Dict" | "dict") => "map",
        (L::Python, "Optional") => "opt",
        (L::Python, "Tuple" | "tuple") => "tuple",
        (L::Java, "List" | "ArrayList") => "list",
        (L::Java, "Map" | "HashMap") => "map",
        (L::Java, "Optional") => "opt",
        (L::CSharp, "List" | "IList") => "list",
        (L::CSharp, "Dictionary" | "IDictionary") => "map",
        (L::CSharp, "Nullable") => "opt",
        (L::Kotlin, "List" | "MutableList" | "Array") => "list",
        (L::Kotlin, "Map" | "MutableMap") => "map",
        (L::Kotlin, "Pair") if n == 2 => "tuple",
        (L::Kotlin, "Triple") if n == 3 => "tuple",
        (L::Scala, "List" | "Seq" | "Array" | "Vector") => "list",
        (L::Scala, "Map") => "map",
        (L::Scala, "Option") => "opt",
        (L::Swift, "Array") => "list",
        (L::Swift, "Dictionary") => "map",
        (L::Swift, "Optional") => "opt",
        (L::TypeScript, "Array") => "list",
        (L::TypeScript, "Map" | "Record") => "map",
        _ => return None,
    };
    match (kind, n) {
        ("list", 1) => one(&mut args).map(TypeRef::list),
        ("opt", 1) => one(&mut args).map(TypeRef::optional),
        ("map", 2) => {
            let v = args.pop()?;
            let k = args.pop()?;
            Some(TypeRef::map(k, v))
        }
        ("tuple", n) if n >= 2 => Some(TypeRef::Tuple(args)),
        _ => None,
    }
}

/// Parse a type expression; `None` means the language's dynamic spelling or an empty annotation.
///
/// Unrecognised syntax degrades to `Opaque` with the trimmed source text.
pub fn parse_type(lang: LanguageId, text: &str, slot: TypeSlot) -> Option<TypeRef> {
    let trimmed = text.trim();
    if trimmed.is_empty() || lang.is_untyped() {
        return None;
    }
    let mut parser = TypeParser {
        lang,
        src: trimmed,
        toks: lex(trimmed),
        pos: 0,
    };
    match parser.parse_type(slot) {
        Ok((p, _, _)) if parser.pos == parser.toks.len() => match p {
            P::Ty(t) => Some(t),
            P::Dyn => None,
            P::Null => Some(TypeRef::opaque(trimmed)),
        },
        _ => Some(TypeRef::opaque(trimmed)),
    }
}
