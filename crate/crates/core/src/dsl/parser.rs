use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostic::{self, Diagnostic, Locator, RuleId};
use crate::keyword::Keyword;
use crate::model::{
    resolve_references, row_key, AcSpaceRegion, AcceptanceCriterion, Aggregation, ArgumentRow,
    CausalStage, Cell, ClaimKind, ClaimNode, ContextBlock, Evidence, EvidenceStrength, Hazard,
    HazardCategory, Indicator, Methodology, ModelError, RateBound, ReferenceField, SafetyCase,
    SafetyCaseParts, SeverityLevel, ValidationTarget,
};
use crate::space::{Capability, FunctionalityStatus, Role};
use crate::span::SourceSpan;

use super::lexer::{lex, Token, TokenKind};

/// Claim trees nested deeper than this are rejected.
pub const MAX_CLAIM_DEPTH: usize = 64;

/// Source locations of everything in a parsed document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpanIndex {
    pub file: String,
    pub case: Option<SourceSpan>,
    pub context: Option<SourceSpan>,
    pub context_fields: BTreeMap<&'static str, SourceSpan>,
    /// Keyed by element id, or by row key for argument rows.
    pub elements: BTreeMap<String, SourceSpan>,
    /// Keyed by (referrer, field, target).
    pub references: BTreeMap<(String, ReferenceField, String), SourceSpan>,
}

impl SpanIndex {
    pub fn locate(&self, locator: &Locator) -> Option<SourceSpan> {
        match locator {
            Locator::Source => None,
            Locator::Case => self.case.clone(),
            Locator::Context => self.context.clone().or_else(|| self.case.clone()),
            Locator::ContextField(field) => self
                .context_fields
                .get(field)
                .or(self.context.as_ref())
                .cloned(),
            Locator::Element(id) => self.elements.get(id).cloned(),
            Locator::Reference { referrer, field, target } => self
                .references
                .get(&(referrer.clone(), *field, target.clone()))
                .or_else(|| self.elements.get(referrer))
                .cloned(),
        }
    }

    /// Fill in spans for diagnostics that only carry a locator.
    pub fn attach(&self, diagnostics: &mut [Diagnostic]) {
        for d in diagnostics.iter_mut() {
            if d.span.is_none() {
                d.span = self.locate(&d.locator);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParseResult {
    /// Present iff no fatal error occurred.
    pub case: Option<SafetyCase>,
    pub diagnostics: Vec<Diagnostic>,
    pub span_index: SpanIndex,
}

impl ParseResult {
    pub fn is_fatal(&self) -> bool {
        self.case.is_none()
    }
}

/// Parse raw bytes; invalid UTF-8 is reported as a diagnostic.
pub fn parse_bytes(bytes: &[u8], file_name: &str) -> ParseResult {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse(text, file_name),
        Err(err) => {
            let valid = std::str::from_utf8(&bytes[..err.valid_up_to()]).unwrap_or_default();
            let (line, col) = end_position(valid);
            let span = SourceSpan::new(file_name, (line, col), (line, col));
            failed(
                file_name,
                Diagnostic::at(
                    RuleId::E008,
                    "",
                    format!("document is not valid UTF-8 (invalid byte at offset {})", err.valid_up_to()),
                    span,
                ),
            )
        }
    }
}

fn end_position(text: &str) -> (usize, usize) {
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\n' => (line, col) = (line + 1, 1),
            '\r' if chars.peek() != Some(&'\n') => (line, col) = (line + 1, 1),
            _ => col += 1,
        }
    }
    (line, col)
}

fn failed(file_name: &str, diagnostic: Diagnostic) -> ParseResult {
    ParseResult {
        case: None,
        diagnostics: vec![diagnostic],
        span_index: SpanIndex { file: file_name.to_string(), ..SpanIndex::default() },
    }
}

/// Parse an aurcase document.
pub fn parse(text: &str, file_name: &str) -> ParseResult {
    let tokens = match lex(text, file_name) {
        Ok(tokens) => tokens,
        Err(err) => return failed(file_name, Diagnostic::at(RuleId::E008, "", err.message, err.span)),
    };
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        index: SpanIndex { file: file_name.to_string(), ..SpanIndex::default() },
        occurrences: Vec::new(),
        duplicates: Vec::new(),
    };
    let parts = match parser.document() {
        Ok(parts) => parts,
        Err(diag) => return failed(file_name, *diag),
    };

    let Parser { index, duplicates, .. } = parser;
    let mut diagnostics = duplicates;
    let case = match SafetyCase::new(parts) {
        Ok(case) if diagnostics.is_empty() => Some(case),
        Ok(_) => None,
        Err(errors) => {
            for error in errors.0 {
                if matches!(error, ModelError::DuplicateId { .. } | ModelError::DuplicateRowLabel { .. }) {
                    continue;
                }
                let subject = error.subject();
                let mut d = Diagnostic::new(RuleId::E008, subject.clone(), error.to_string(), Locator::Element(subject));
                d.span = index.locate(&d.locator).or_else(|| index.case.clone());
                diagnostics.push(d);
            }
            None
        }
    };

    if let Some(case) = &case {
        for finding in resolve_references(case) {
            let mut d = Diagnostic::new(
                RuleId::E009,
                finding.referrer.clone(),
                finding.to_string(),
                Locator::Reference {
                    referrer: finding.referrer,
                    field: finding.field,
                    target: finding.missing,
                },
            );
            d.span = index.locate(&d.locator);
            diagnostics.push(d);
        }
    }

    diagnostic::sort(&mut diagnostics);
    ParseResult { case, diagnostics, span_index: index }
}

type PResult<T> = Result<T, Box<Diagnostic>>;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    index: SpanIndex,
    /// First declaration of every id, for duplicate detection.
    occurrences: Vec<(String, SourceSpan)>,
    duplicates: Vec<Diagnostic>,
}

fn syntax(message: impl Into<String>, span: &SourceSpan) -> Box<Diagnostic> {
    Box::new(Diagnostic::at(RuleId::E008, "", message, span.clone()))
}

fn is_identifier(word: &str) -> bool {
    word.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
}

const TOP_LEVEL: &str = "context, hazard, methodology, indicator, criterion, evidence, claim";

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_nth(&self, n: usize) -> &'t Token {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> &'t Token {
        let tok = self.peek();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &str) -> Box<Diagnostic> {
        let tok = self.peek();
        syntax(format!("expected {expected}, found {}", tok.kind.describe()), &tok.span)
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        if self.peek().kind == kind {
            Ok(self.next())
        } else {
            Err(self.unexpected(&kind.describe()))
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<&'t Token> {
        match &self.peek().kind {
            TokenKind::Word(w) if w == kw => Ok(self.next()),
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Word(w) if w == kw)
    }

    fn word(&mut self, what: &str) -> PResult<(String, &'t Token)> {
        match &self.peek().kind {
            TokenKind::Word(w) => {
                let tok = self.next();
                Ok((w.clone(), tok))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, &'t Token)> {
        let (w, tok) = self.word(what)?;
        if !is_identifier(&w) {
            return Err(syntax(
                format!("`{w}` is not a valid {what}; identifiers start with a letter or `_`"),
                &tok.span,
            ));
        }
        Ok((w, tok))
    }

    fn string(&mut self) -> PResult<String> {
        match &self.peek().kind {
            TokenKind::Str(s) => {
                self.next();
                Ok(s.clone())
            }
            _ => Err(self.unexpected("a string")),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        let (w, tok) = self.word("a number")?;
        match w.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(syntax(format!("`{w}` is not a finite number"), &tok.span)),
        }
    }

    fn kw_value<K: Keyword>(&mut self) -> PResult<K> {
        let (w, tok) = self.word(K::VOCABULARY)?;
        K::from_keyword(&w)
            .map_err(|e| syntax(format!("{e}; expected one of: {}", K::expected()), &tok.span))
    }

    fn kw_set<K: Keyword>(&mut self) -> PResult<BTreeSet<K>> {
        let mut out = BTreeSet::new();
        loop {
            out.insert(self.kw_value::<K>()?);
            if self.peek().kind != TokenKind::Comma {
                return Ok(out);
            }
            self.next();
        }
    }

    /// `key =`
    fn assign(&mut self, key: &str) -> PResult<&'t Token> {
        let tok = self.keyword(key)?;
        self.expect(TokenKind::Eq)?;
        Ok(tok)
    }

    /// Comma separated identifiers; returns each with its token span.
    fn id_list(&mut self, what: &str) -> PResult<Vec<(String, SourceSpan)>> {
        let mut out = Vec::new();
        loop {
            let (id, tok) = self.ident(what)?;
            out.push((id, tok.span.clone()));
            if self.peek().kind != TokenKind::Comma {
                return Ok(out);
            }
            self.next();
        }
    }

    fn open(&mut self) -> PResult<SourceSpan> {
        Ok(self.expect(TokenKind::LBrace)?.span.clone())
    }

    /// Loop over the entries of a `{ ... }` body, calling `entry` with the
    /// leading keyword until the closing brace.
    fn body(
        &mut self,
        open: &SourceSpan,
        expected: &str,
        mut entry: impl FnMut(&mut Self, &str, &'t Token) -> PResult<()>,
    ) -> PResult<SourceSpan> {
        loop {
            let tok = self.peek();
            match &tok.kind {
                TokenKind::RBrace => {
                    self.next();
                    return Ok(tok.span.clone());
                }
                TokenKind::Eof => {
                    return Err(syntax(
                        format!(
                            "unclosed block: expected `}}` to close the `{{` opened at {}:{} before end of input",
                            open.start_line, open.start_col
                        ),
                        open,
                    ))
                }
                TokenKind::Word(w) => entry(self, w, tok)?,
                _ => return Err(self.unexpected(&format!("one of {expected}, or `}}`"))),
            }
        }
    }

    fn declare(&mut self, id: &str, span: &SourceSpan) {
        if let Some((_, first)) = self.occurrences.iter().find(|(seen, _)| seen == id) {
            let message = format!(
                "identifier `{id}` is already declared at {}:{}",
                first.start_line, first.start_col
            );
            self.duplicates.push(Diagnostic::at(RuleId::E010, id, message, span.clone()));
            return;
        }
        self.occurrences.push((id.to_string(), span.clone()));
        self.index.elements.insert(id.to_string(), span.clone());
    }

    fn reference(&mut self, referrer: &str, field: ReferenceField, target: &str, span: SourceSpan) {
        self.index
            .references
            .entry((referrer.to_string(), field, target.to_string()))
            .or_insert(span);
    }

    fn document(&mut self) -> PResult<SafetyCaseParts> {
        let head = self.keyword("safety_case")?.span.clone();
        let id = self.string()?;
        let open = self.open()?;
        self.index.case = Some(head.to(&open));

        let mut parts = SafetyCaseParts { id, ..SafetyCaseParts::default() };
        let mut context_seen = false;
        self.body(&open, TOP_LEVEL, |p, w, tok| {
            match w {
                "context" => {
                    if context_seen {
                        return Err(syntax("a safety case has exactly one context block", &tok.span));
                    }
                    context_seen = true;
                    parts.context = p.context()?;
                }
                "hazard" => parts.hazards.push(p.hazard()?),
                "methodology" => parts.methodologies.push(p.methodology()?),
                "indicator" => parts.indicators.push(p.indicator()?),
                "criterion" => parts.criteria.push(p.criterion()?),
                "evidence" => parts.evidence.push(p.evidence()?),
                "claim" => parts.claims.push(p.claim()?),
                other => {
                    return Err(syntax(format!("unknown keyword `{other}`, expected one of {TOP_LEVEL}"), &tok.span))
                }
            }
            Ok(())
        })?;
        if !context_seen {
            return Err(syntax(
                "safety case has no `context` block",
                self.index.case.as_ref().expect("case span recorded"),
            ));
        }
        let tail = self.peek();
        if tail.kind != TokenKind::Eof {
            return Err(syntax(
                format!("unexpected {} after the end of the safety case", tail.kind.describe()),
                &tail.span,
            ));
        }
        Ok(parts)
    }

    fn context(&mut self) -> PResult<ContextBlock> {
        let head = self.keyword("context")?.span.clone();
        let open = self.open()?;
        let mut ctx = ContextBlock::default();
        let mut any = false;
        let end = self.body(&open, "a context field", |p, w, tok| {
            let Some(&field) = ContextBlock::FIELDS.iter().find(|f| **f == w) else {
                return Err(syntax(
                    format!("unknown context field `{w}`, expected one of {}", ContextBlock::FIELDS.join(", ")),
                    &tok.span,
                ));
            };
            if p.index.context_fields.contains_key(field) {
                return Err(syntax(format!("duplicate context field `{field}`"), &tok.span));
            }
            p.assign(field)?;
            *ctx.get_mut(field).expect("known field") = p.string()?;
            p.index.context_fields.insert(field, tok.span.clone());
            any = true;
            Ok(())
        })?;
        if !any {
            return Err(syntax("context block must set at least one field", &open));
        }
        self.index.context = Some(head.to(&end));
        Ok(ctx)
    }

    fn hazard(&mut self) -> PResult<Hazard> {
        let head = self.keyword("hazard")?.span.clone();
        let (id, id_tok) = self.ident("hazard id")?;
        self.declare(&id, &head.to(&id_tok.span));
        self.assign("category")?;
        let primary_category = self.kw_value::<HazardCategory>()?;
        let mut secondary_categories = BTreeSet::new();
        if self.is_keyword("also") {
            self.assign("also")?;
            secondary_categories = self.kw_set::<HazardCategory>()?;
        }
        let open = self.open()?;
        let mut description = None;
        self.body(&open, "`description`", |p, w, tok| match w {
            "description" if description.is_none() => {
                p.assign("description")?;
                description = Some(p.string()?);
                Ok(())
            }
            _ => Err(unknown_key(w, "hazard", tok)),
        })?;
        Ok(Hazard {
            description: required(description, "description", "hazard", &open)?,
            id,
            primary_category,
            secondary_categories,
        })
    }

    fn methodology(&mut self) -> PResult<Methodology> {
        let head = self.keyword("methodology")?.span.clone();
        let (id, id_tok) = self.ident("methodology id")?;
        self.declare(&id, &head.to(&id_tok.span));
        let open = self.open()?;
        let (mut name, mut categories, mut region) = (None, None, None);
        self.body(&open, "`name`, `categories` or `region`", |p, w, tok| {
            match w {
                "name" if name.is_none() => {
                    p.assign("name")?;
                    name = Some(p.string()?);
                }
                "categories" if categories.is_none() => {
                    p.assign("categories")?;
                    categories = Some(p.kw_set::<HazardCategory>()?);
                }
                "region" if region.is_none() => region = Some(p.region()?),
                _ => return Err(unknown_key(w, "methodology", tok)),
            }
            Ok(())
        })?;
        let hazard_categories = categories.unwrap_or_else(|| {
            if region.is_some() {
                BTreeSet::from([HazardCategory::Behavioral])
            } else {
                BTreeSet::new()
            }
        });
        Ok(Methodology {
            name: required(name, "name", "methodology", &open)?,
            id,
            region,
            hazard_categories,
        })
    }

    fn region(&mut self) -> PResult<AcSpaceRegion> {
        self.keyword("region")?;
        let open = self.open()?;
        let mut region = AcSpaceRegion::default();
        let mut assigned: BTreeSet<&'static str> = BTreeSet::new();
        let mut weak_levels: Vec<(SeverityLevel, SourceSpan)> = Vec::new();
        let mut weak_cells: Vec<(Cell, SourceSpan)> = Vec::new();
        self.body(&open, "a dimension assignment or `weak(...)`", |p, w, tok| {
            let dim: &'static str = match w {
                "severity" => "severity",
                "role" => "role",
                "capability" => "capability",
                "status" => "status",
                "aggregation" => "aggregation",
                "weak" => {
                    p.next();
                    p.expect(TokenKind::LParen)?;
                    let level = p.kw_value::<SeverityLevel>()?;
                    let close = p.expect(TokenKind::RParen)?;
                    weak_levels.push((level, tok.span.to(&close.span)));
                    return Ok(());
                }
                "weak_cell" => {
                    p.next();
                    p.expect(TokenKind::LParen)?;
                    let severity = p.kw_value()?;
                    p.expect(TokenKind::Comma)?;
                    let role = p.kw_value()?;
                    p.expect(TokenKind::Comma)?;
                    let capability = p.kw_value()?;
                    p.expect(TokenKind::Comma)?;
                    let status = p.kw_value()?;
                    p.expect(TokenKind::Comma)?;
                    let aggregation = p.kw_value()?;
                    let close = p.expect(TokenKind::RParen)?;
                    weak_cells.push((
                        Cell { severity, role, capability, status, aggregation },
                        tok.span.to(&close.span),
                    ));
                    return Ok(());
                }
                _ => return Err(unknown_key(w, "region", tok)),
            };
            if !assigned.insert(dim) {
                return Err(syntax(format!("dimension `{dim}` is assigned twice"), &tok.span));
            }
            p.assign(dim)?;
            match dim {
                "severity" => region.severities = p.severity_set()?,
                "role" => region.roles = p.kw_set::<Role>()?,
                "capability" => region.capabilities = p.kw_set::<Capability>()?,
                "status" => region.statuses = p.kw_set::<FunctionalityStatus>()?,
                _ => region.aggregations = p.kw_set::<Aggregation>()?,
            }
            Ok(())
        })?;
        for dim in crate::space::DIMENSIONS {
            if !assigned.contains(dim) {
                return Err(syntax(format!("region does not assign dimension `{dim}`"), &open));
            }
        }
        for (level, span) in weak_levels {
            if !region.severities.contains(&level) {
                return Err(syntax(format!("`weak({level})` names a severity outside the region"), &span));
            }
            region.weak_cells.extend(region.cells_at(level));
        }
        for (cell, span) in weak_cells {
            if !region.contains(&cell) {
                return Err(syntax("`weak_cell(...)` names a cell outside the region", &span));
            }
            region.weak_cells.insert(cell);
        }
        Ok(region)
    }

    fn severity_set(&mut self) -> PResult<BTreeSet<SeverityLevel>> {
        let first_tok = self.peek().span.clone();
        let first = self.kw_value::<SeverityLevel>()?;
        if self.peek().kind == TokenKind::DotDot {
            self.next();
            let last_tok = self.peek().span.clone();
            let last = self.kw_value::<SeverityLevel>()?;
            if last < first {
                return Err(syntax(
                    format!("severity range `{first}..{last}` is empty"),
                    &first_tok.to(&last_tok),
                ));
            }
            return Ok(SeverityLevel::ALL.iter().copied().filter(|s| (first..=last).contains(s)).collect());
        }
        let mut out = BTreeSet::from([first]);
        while self.peek().kind == TokenKind::Comma {
            self.next();
            out.insert(self.kw_value()?);
        }
        Ok(out)
    }

    fn indicator(&mut self) -> PResult<Indicator> {
        let head = self.keyword("indicator")?.span.clone();
        let (id, id_tok) = self.ident("indicator id")?;
        self.declare(&id, &head.to(&id_tok.span));
        self.assign("stage")?;
        let causal_stage = self.kw_value::<CausalStage>()?;
        let open = self.open()?;
        let mut description = None;
        self.body(&open, "`description`", |p, w, tok| match w {
            "description" if description.is_none() => {
                p.assign("description")?;
                description = Some(p.string()?);
                Ok(())
            }
            _ => Err(unknown_key(w, "indicator", tok)),
        })?;
        Ok(Indicator {
            description: required(description, "description", "indicator", &open)?,
            id,
            causal_stage,
        })
    }

    fn criterion(&mut self) -> PResult<AcceptanceCriterion> {
        let head = self.keyword("criterion")?.span.clone();
        let (id, id_tok) = self.ident("criterion id")?;
        self.declare(&id, &head.to(&id_tok.span));
        self.assign("hazard")?;
        let mut hazard_ids = BTreeSet::new();
        for (h, span) in self.id_list("hazard id")? {
            self.reference(&id, ReferenceField::HazardIds, &h, span);
            hazard_ids.insert(h);
        }
        self.assign("methodology")?;
        let (methodology_id, m_tok) = self.ident("methodology id")?;
        self.reference(&id, ReferenceField::MethodologyId, &methodology_id, m_tok.span.clone());
        self.assign("aggregation")?;
        let aggregation = self.kw_value::<Aggregation>()?;

        let open = self.open()?;
        let (mut statement, mut target, mut region, mut indicators) = (None, None, None, None);
        self.body(&open, "`statement`, `target`, `region` or `indicator`", |p, w, tok| {
            match w {
                "statement" if statement.is_none() => {
                    p.assign("statement")?;
                    statement = Some(p.string()?);
                }
                "target" if target.is_none() => target = Some(p.target()?),
                "region" if region.is_none() => region = Some(p.region()?),
                "indicator" if indicators.is_none() => {
                    p.assign("indicator")?;
                    let mut set = BTreeSet::new();
                    for (i, span) in p.id_list("indicator id")? {
                        p.reference(&id, ReferenceField::IndicatorIds, &i, span);
                        set.insert(i);
                    }
                    indicators = Some(set);
                }
                _ => return Err(unknown_key(w, "criterion", tok)),
            }
            Ok(())
        })?;
        Ok(AcceptanceCriterion {
            statement: required(statement, "statement", "criterion", &open)?,
            id,
            hazard_ids,
            methodology_id,
            indicator_ids: indicators.unwrap_or_default(),
            region,
            aggregation,
            target,
        })
    }

    fn target(&mut self) -> PResult<ValidationTarget> {
        self.keyword("target")?;
        let (kind, tok) = self.word("`rate_bound` or `qualitative`")?;
        match kind.as_str() {
            "qualitative" => {
                self.expect(TokenKind::LParen)?;
                let text = self.string()?;
                self.expect(TokenKind::RParen)?;
                Ok(ValidationTarget::Qualitative(text))
            }
            "rate_bound" => {
                self.expect(TokenKind::LParen)?;
                self.assign("events")?;
                let event_definition = self.string()?;
                self.expect(TokenKind::Comma)?;
                self.assign("max")?;
                let max_rate = self.number()?;
                self.expect(TokenKind::Comma)?;
                self.assign("per")?;
                let exposure_unit = self.string()?;
                self.expect(TokenKind::Comma)?;
                self.assign("confidence")?;
                let confidence = self.number()?;
                self.expect(TokenKind::RParen)?;
                Ok(ValidationTarget::RateBound(RateBound {
                    event_definition,
                    max_rate,
                    exposure_unit,
                    confidence,
                }))
            }
            other => Err(syntax(
                format!("unknown target kind `{other}`, expected `rate_bound` or `qualitative`"),
                &tok.span,
            )),
        }
    }

    fn evidence(&mut self) -> PResult<Evidence> {
        let head = self.keyword("evidence")?.span.clone();
        let (id, id_tok) = self.ident("evidence id")?;
        self.declare(&id, &head.to(&id_tok.span));
        self.assign("methodology")?;
        let (methodology_id, m_tok) = self.ident("methodology id")?;
        self.reference(&id, ReferenceField::MethodologyId, &methodology_id, m_tok.span.clone());
        self.assign("strength")?;
        let strength = self.kw_value::<EvidenceStrength>()?;
        let open = self.open()?;
        let (mut kind, mut uri) = (None, None);
        self.body(&open, "`kind` or `uri`", |p, w, tok| {
            match w {
                "kind" if kind.is_none() => {
                    p.assign("kind")?;
                    kind = Some(p.string()?);
                }
                "uri" if uri.is_none() => {
                    p.assign("uri")?;
                    uri = Some(p.string()?);
                }
                _ => return Err(unknown_key(w, "evidence", tok)),
            }
            Ok(())
        })?;
        Ok(Evidence {
            kind: required(kind, "kind", "evidence", &open)?,
            uri: required(uri, "uri", "evidence", &open)?,
            id,
            methodology_id,
            strength,
        })
    }

    fn claim(&mut self) -> PResult<ClaimNode> {
        let head = self.keyword("claim")?.span.clone();
        let (id, id_tok) = self.ident("claim id")?;
        self.declare(&id, &head.to(&id_tok.span));
        self.assign("criterion")?;
        let (criterion, c_tok) = self.ident("criterion id")?;
        self.reference(&id, ReferenceField::CriterionId, &criterion, c_tok.span.clone());
        let mut node = ClaimNode {
            id,
            criterion_id: Some(criterion),
            kind: ClaimKind::TopClaim,
            facet_label: None,
            statement: String::new(),
            children: Vec::new(),
            rows: Vec::new(),
        };
        self.claim_body(&mut node, 1)?;
        Ok(node)
    }

    fn claim_body(&mut self, node: &mut ClaimNode, depth: usize) -> PResult<()> {
        let open = self.open()?;
        if depth > MAX_CLAIM_DEPTH {
            return Err(syntax(format!("claim tree is nested deeper than {MAX_CLAIM_DEPTH} levels"), &open));
        }
        let mut statement_seen = false;
        let mut labels: Vec<(String, SourceSpan)> = Vec::new();
        self.body(&open, "a subclaim, `statement` or `argument`", |p, w, tok| {
            let kind = match w {
                "statement" if !statement_seen => {
                    statement_seen = true;
                    p.assign("statement")?;
                    node.statement = p.string()?;
                    return Ok(());
                }
                "argument" => {
                    let row = p.row(&node.id, &mut labels)?;
                    node.rows.push(row);
                    return Ok(());
                }
                "reasonableness" => ClaimKind::Reasonableness,
                "satisfaction" => ClaimKind::Satisfaction,
                "coverage_assessment" => ClaimKind::CoverageAssessment,
                "confidence_assessment" => ClaimKind::ConfidenceAssessment,
                "facet" => ClaimKind::Facet,
                _ => return Err(unknown_key(w, "claim", tok)),
            };
            p.next();
            let mut header = tok.span.clone();
            let facet_label = if kind == ClaimKind::Facet {
                let label_span = p.peek().span.clone();
                let label = p.string()?;
                header = header.to(&label_span);
                Some(label)
            } else {
                None
            };
            let explicit = match (&p.peek().kind, &p.peek_nth(1).kind) {
                (TokenKind::Word(_), TokenKind::LBrace) => {
                    let (cid, cid_tok) = p.ident("claim id")?;
                    header = header.to(&cid_tok.span);
                    Some(cid)
                }
                _ => None,
            };
            let id = explicit.unwrap_or_else(|| default_child_id(&node.id, node.children.len()));
            p.declare(&id, &header);
            let mut child = ClaimNode {
                id,
                criterion_id: None,
                kind,
                facet_label,
                statement: String::new(),
                children: Vec::new(),
                rows: Vec::new(),
            };
            p.claim_body(&mut child, depth + 1)?;
            node.children.push(child);
            Ok(())
        })?;
        Ok(())
    }

    fn row(&mut self, node_id: &str, labels: &mut Vec<(String, SourceSpan)>) -> PResult<ArgumentRow> {
        let head = self.keyword("argument")?.span.clone();
        let (label, label_tok) = self.word("argument label")?;
        let header = head.to(&label_tok.span);
        let key = row_key(node_id, &label);
        if let Some((_, first)) = labels.iter().find(|(l, _)| *l == label) {
            let message = format!(
                "argument label `{label}` is already used at {}:{}",
                first.start_line, first.start_col
            );
            self.duplicates.push(Diagnostic::at(RuleId::E010, key.clone(), message, header.clone()));
        } else {
            labels.push((label.clone(), header.clone()));
            self.index.elements.insert(key.clone(), header);
        }

        let open = self.open()?;
        let mut row = ArgumentRow { label, ..ArgumentRow::default() };
        let (mut text, mut evidence, mut limitations, mut counter) = (false, false, false, false);
        self.body(&open, "`text`, `evidence`, `limitations` or `counter`", |p, w, tok| {
            match w {
                "text" if !text => {
                    text = true;
                    p.assign("text")?;
                    row.argument = p.string()?;
                }
                "evidence" if !evidence => {
                    evidence = true;
                    p.assign("evidence")?;
                    for (e, span) in p.id_list("evidence id")? {
                        p.reference(&key, ReferenceField::EvidenceIds, &e, span);
                        row.evidence_ids.insert(e);
                    }
                }
                "limitations" if !limitations => {
                    limitations = true;
                    p.assign("limitations")?;
                    row.limitations = p.string()?;
                }
                "counter" if !counter => {
                    counter = true;
                    p.assign("counter")?;
                    row.counter_argument = p.string()?;
                }
                _ => return Err(unknown_key(w, "argument", tok)),
            }
            Ok(())
        })?;
        if !text {
            return Err(syntax("argument is missing `text`", &open));
        }
        Ok(row)
    }
}

/// Subclaims without an explicit id are numbered after their parent:
/// `C1.2` is the second child of `C1`.
pub fn default_child_id(parent: &str, index: usize) -> String {
    format!("{parent}.{}", index + 1)
}

fn unknown_key(word: &str, block: &str, tok: &Token) -> Box<Diagnostic> {
    syntax(format!("unknown or repeated key `{word}` in {block} block"), &tok.span)
}

fn required<T>(value: Option<T>, key: &str, block: &str, open: &SourceSpan) -> PResult<T> {
    value.ok_or_else(|| syntax(format!("{block} block is missing `{key}`"), open))
}
