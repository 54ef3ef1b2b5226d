use super::document::{
    CptDecl, CptRow, CredalClass, CredalDecl, CredalParam, NetworkDocument, ParamValue, ParentsDecl, UtilityDecl,
    VariableDecl, FORMAT_VERSION,
};
use super::lexer::{tokenize, Tok, Token};
use super::model::{build_model, CredalModel, Loc};
use super::{ParseError, Position};
use crate::credal::ColumnMode;

/// Where each declaration came from, for semantic error positions.
#[derive(Debug, Default)]
pub(crate) struct SourceMap {
    pub variables: Vec<Position>,
    pub parents: Vec<Position>,
    pub cpts: Vec<(Position, Vec<Position>)>,
    pub credal: Vec<(Position, Vec<Position>)>,
    pub utilities: Vec<Position>,
}

impl SourceMap {
    pub fn locate(&self, loc: Loc) -> Position {
        let start = Position::new(1, 1);
        match loc {
            Loc::Document => start,
            Loc::Variable(i) => self.variables.get(i).copied().unwrap_or(start),
            Loc::Parents(i) => self.parents.get(i).copied().unwrap_or(start),
            Loc::Cpt(i, row) => self
                .cpts
                .get(i)
                .map(|(p, rows)| row.and_then(|r| rows.get(r).copied()).unwrap_or(*p))
                .unwrap_or(start),
            Loc::Credal(i, param) => self
                .credal
                .get(i)
                .map(|(p, params)| param.and_then(|r| params.get(r).copied()).unwrap_or(*p))
                .unwrap_or(start),
            Loc::Utility(i) => self.utilities.get(i).copied().unwrap_or(start),
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    end: Position,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.at)
    }

    fn peek_at(&self, k: usize) -> Option<&Token> {
        self.toks.get(self.at + k)
    }

    fn here(&self) -> Position {
        self.peek().map(|t| t.pos).unwrap_or(self.end)
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of file".into(),
            Some(Token { tok: Tok::Word(w), .. }) => format!("'{w}'"),
            Some(Token { tok: Tok::Punct(c), .. }) => format!("'{c}'"),
        }
    }

    fn word(&mut self, what: &str) -> Result<(String, Position), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Word(w), pos }) => {
                let out = (w.clone(), *pos);
                self.at += 1;
                Ok(out)
            }
            _ => Err(ParseError::syntax(
                self.here(),
                format!("expected {what}, found {}", self.describe()),
            )),
        }
    }

    fn is_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c)
    }

    fn punct(&mut self, c: char) -> Result<Position, ParseError> {
        if self.is_punct(c) {
            let pos = self.here();
            self.at += 1;
            Ok(pos)
        } else {
            Err(ParseError::syntax(
                self.here(),
                format!("expected '{c}', found {}", self.describe()),
            ))
        }
    }

    fn word_list(&mut self, what: &str) -> Result<Vec<String>, ParseError> {
        let mut out = vec![self.word(what)?.0];
        while self.is_punct(',') {
            self.at += 1;
            out.push(self.word(what)?.0);
        }
        Ok(out)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        let (w, pos) = self.word("a number")?;
        parse_number(&w, pos)
    }

    fn number_list(&mut self) -> Result<Vec<f64>, ParseError> {
        let mut out = vec![self.number()?];
        while self.is_punct(',') {
            self.at += 1;
            out.push(self.number()?);
        }
        Ok(out)
    }

    /// Words up to a ':' within the current entry, if there is one.
    fn entry_key(&mut self) -> Result<Option<Vec<(String, Position)>>, ParseError> {
        let mut k = 0;
        loop {
            match self.peek_at(k).map(|t| &t.tok) {
                Some(Tok::Word(_)) => k += 1,
                Some(Tok::Punct(':')) => break,
                _ => return Ok(None),
            }
        }
        if k == 0 {
            return Err(ParseError::syntax(self.here(), "expected a key before ':'"));
        }
        let mut key = Vec::with_capacity(k);
        for _ in 0..k {
            key.push(self.word("a key")?);
        }
        self.punct(':')?;
        Ok(Some(key))
    }

    /// `{ entry ; entry ; … }` with an optional trailing ';'.
    fn block<F>(&mut self, mut entry: F) -> Result<(), ParseError>
    where
        F: FnMut(&mut Self) -> Result<(), ParseError>,
    {
        self.punct('{')?;
        loop {
            if self.is_punct('}') {
                self.at += 1;
                return Ok(());
            }
            entry(self)?;
            if self.is_punct(';') {
                self.at += 1;
            } else if !self.is_punct('}') {
                return Err(ParseError::syntax(
                    self.here(),
                    format!("expected ';' or '}}', found {}", self.describe()),
                ));
            }
        }
    }
}

fn parse_number(w: &str, pos: Position) -> Result<f64, ParseError> {
    match w.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ParseError::syntax(pos, format!("'{w}' is not a finite decimal number"))),
    }
}

fn parse_document(text: &str) -> Result<(NetworkDocument, SourceMap), ParseError> {
    let toks = tokenize(text)?;
    let lines = text.lines().count();
    let mut p = Parser {
        toks,
        at: 0,
        end: Position::new(lines.max(1), 1),
    };
    let mut doc = NetworkDocument {
        version: FORMAT_VERSION,
        variables: Vec::new(),
        parents: Vec::new(),
        cpts: Vec::new(),
        credal: Vec::new(),
        utilities: Vec::new(),
    };
    let mut map = SourceMap::default();
    let mut seen_version = false;

    while p.peek().is_some() {
        let (kw, kw_pos) = p.word("a declaration keyword")?;
        match kw.as_str() {
            "version" => {
                let (w, pos) = p.word("a version number")?;
                if seen_version {
                    return Err(ParseError::semantic(kw_pos, "version declared twice"));
                }
                seen_version = true;
                doc.version = w
                    .parse()
                    .map_err(|_| ParseError::syntax(pos, format!("'{w}' is not a version number")))?;
                if doc.version != FORMAT_VERSION {
                    return Err(ParseError::semantic(
                        pos,
                        format!("unsupported format version {}", doc.version),
                    ));
                }
            }
            "variable" => {
                let (name, pos) = p.word("a variable name")?;
                let mut values = None;
                p.block(|p| {
                    let (key, kpos) = p.word("'values'")?;
                    if key != "values" {
                        return Err(ParseError::syntax(kpos, format!("unknown variable field '{key}'")));
                    }
                    if values.is_some() {
                        return Err(ParseError::semantic(kpos, "values given twice"));
                    }
                    p.punct(':')?;
                    values = Some(p.word_list("a value name")?);
                    Ok(())
                })?;
                let values =
                    values.ok_or_else(|| ParseError::semantic(pos, format!("variable '{name}' has no values")))?;
                doc.variables.push(VariableDecl { name, values });
                map.variables.push(pos);
            }
            "parents" => {
                let (child, pos) = p.word("a variable name")?;
                p.punct(':')?;
                let parents = p.word_list("a parent name")?;
                doc.parents.push(ParentsDecl { child, parents });
                map.parents.push(pos);
            }
            "cpt" => {
                let (variable, pos) = p.word("a variable name")?;
                let mut rows = Vec::new();
                let mut row_pos = Vec::new();
                p.block(|p| {
                    let start = p.here();
                    let config = match p.entry_key()? {
                        Some(key) => key.into_iter().map(|(w, _)| w).collect(),
                        None => Vec::new(),
                    };
                    rows.push(CptRow {
                        config,
                        probs: p.number_list()?,
                    });
                    row_pos.push(start);
                    Ok(())
                })?;
                doc.cpts.push(CptDecl { variable, rows });
                map.cpts.push((pos, row_pos));
            }
            "credal" => {
                let (variable, pos) = p.word("a variable name")?;
                let mut class = None;
                let mut columns = None;
                let mut params = Vec::new();
                let mut param_pos = Vec::new();
                p.block(|p| {
                    let start = p.here();
                    let mut key = p
                        .entry_key()?
                        .ok_or_else(|| ParseError::syntax(start, "expected 'key: value'"))?;
                    let (name, name_pos) = key.pop().expect("nonempty key");
                    let config: Vec<String> = key.into_iter().map(|(w, _)| w).collect();
                    match name.as_str() {
                        "class" | "columns" if !config.is_empty() => Err(ParseError::syntax(
                            start,
                            format!("'{name}' takes no parent configuration"),
                        )),
                        "class" => {
                            let (tag, tpos) = p.word("a class tag")?;
                            if class.is_some() {
                                return Err(ParseError::semantic(name_pos, "class given twice"));
                            }
                            class =
                                Some(CredalClass::from_tag(&tag).ok_or_else(|| {
                                    ParseError::semantic(tpos, format!("unknown credal class '{tag}'"))
                                })?);
                            Ok(())
                        }
                        "columns" => {
                            let (mode, mpos) = p.word("'joint' or 'separate'")?;
                            if columns.is_some() {
                                return Err(ParseError::semantic(name_pos, "columns given twice"));
                            }
                            columns = Some(match mode.as_str() {
                                "joint" => ColumnMode::Joint,
                                "separate" => ColumnMode::Separate,
                                _ => {
                                    return Err(ParseError::syntax(
                                        mpos,
                                        format!("columns must be 'joint' or 'separate', found '{mode}'"),
                                    ))
                                }
                            });
                            Ok(())
                        }
                        "masses" => {
                            let mut masses = Vec::new();
                            loop {
                                p.punct('{')?;
                                let set = p.word_list("a value name")?;
                                p.punct('}')?;
                                p.punct('=')?;
                                masses.push((set, p.number()?));
                                if !p.is_punct(',') {
                                    break;
                                }
                                p.at += 1;
                            }
                            params.push(CredalParam {
                                config,
                                name,
                                value: ParamValue::Masses(masses),
                            });
                            param_pos.push(start);
                            Ok(())
                        }
                        _ => {
                            params.push(CredalParam {
                                config,
                                name,
                                value: ParamValue::Numbers(p.number_list()?),
                            });
                            param_pos.push(start);
                            Ok(())
                        }
                    }
                })?;
                let class =
                    class.ok_or_else(|| ParseError::semantic(pos, format!("credal '{variable}' has no class")))?;
                doc.credal.push(CredalDecl {
                    variable,
                    class,
                    columns: columns.unwrap_or_default(),
                    params,
                });
                map.credal.push((pos, param_pos));
            }
            "utility" => {
                let (name, pos) = p.word("a utility name")?;
                let mut targets = None;
                let mut values = None;
                p.block(|p| {
                    let (key, kpos) = p.word("'target' or 'values'")?;
                    p.punct(':')?;
                    match key.as_str() {
                        "target" if targets.is_none() => targets = Some(p.word_list("a variable name")?),
                        "values" if values.is_none() => values = Some(p.number_list()?),
                        "target" | "values" => return Err(ParseError::semantic(kpos, format!("{key} given twice"))),
                        _ => return Err(ParseError::syntax(kpos, format!("unknown utility field '{key}'"))),
                    }
                    Ok(())
                })?;
                let targets =
                    targets.ok_or_else(|| ParseError::semantic(pos, format!("utility '{name}' has no target")))?;
                let values =
                    values.ok_or_else(|| ParseError::semantic(pos, format!("utility '{name}' has no values")))?;
                doc.utilities.push(UtilityDecl { name, targets, values });
                map.utilities.push(pos);
            }
            other => {
                return Err(ParseError::syntax(
                    kw_pos,
                    format!(
                        "unknown declaration '{other}' (expected variable, parents, cpt, credal, utility or version)"
                    ),
                ))
            }
        }
    }
    Ok((doc, map))
}

/// Parses and fully checks a network file.
pub fn parse_network_file(text: &str) -> Result<NetworkDocument, ParseError> {
    let (doc, map) = parse_document(text)?;
    build_model(&doc, &|loc| map.locate(loc))?;
    Ok(doc)
}

/// Parses a network file into a network, credal specs and utilities.
pub fn load_model(text: &str) -> Result<CredalModel, ParseError> {
    let (doc, map) = parse_document(text)?;
    build_model(&doc, &|loc| map.locate(loc))
}

/// The JSON mirror of [`NetworkDocument`], fully checked. Semantic errors
/// are reported at line 1, column 1 with the offending declaration named.
pub fn parse_json_document(text: &str) -> Result<NetworkDocument, ParseError> {
    let doc: NetworkDocument = serde_json::from_str(text)
        .map_err(|e| ParseError::syntax(Position::new(e.line().max(1), e.column().max(1)), e.to_string()))?;
    build_model(&doc, &|_| Position::new(1, 1))?;
    Ok(doc)
}

pub fn load_model_json(text: &str) -> Result<CredalModel, ParseError> {
    let doc = parse_json_document(text)?;
    build_model(&doc, &|_| Position::new(1, 1))
}

/// Checks a document built or edited in memory; errors sit at line 1,
/// column 1 with the offending declaration named.
pub fn model_from_document(doc: &NetworkDocument) -> Result<CredalModel, ParseError> {
    build_model(doc, &|_| Position::new(1, 1))
}
