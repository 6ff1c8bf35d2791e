use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseError, ParseErrors, SourceSpan};
use crate::model::{Change, ChangeKind, ChangeSet, NodeRef, SynonymScope};

const COMMANDS: [&str; 9] = [
    "rename", "obsolete", "delete", "create", "replace", "add", "remove", "change", "move",
];

fn kw(word: &str) -> String {
    format!("\"{word}\"")
}

const REF: &str = "node reference (CURIE, 'label' or bare word)";
const QUOTED: &str = "quoted string";
const END: &str = "end of command";

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: SourceSpan,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error(&self, expected: Vec<String>) -> ParseError {
        match self.peek() {
            Some(tok) => ParseError {
                span: tok.span,
                expected,
                found: format!("`{}`", tok.text),
            },
            None => ParseError {
                span: self.end,
                expected,
                found: "end of input".to_string(),
            },
        }
    }

    fn peek_word(&self) -> Option<&str> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Word(w),
                ..
            }) => Some(w),
            _ => None,
        }
    }

    fn eat(&mut self, word: &str) -> bool {
        if self.peek_word() == Some(word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        if self.eat(word) {
            Ok(())
        } else {
            Err(self.error(vec![kw(word)]))
        }
    }

    fn reference(&mut self) -> Result<NodeRef, ParseError> {
        let r = match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Curie(c)) => NodeRef::Curie(c.clone()),
            Some(TokenKind::Quoted(q)) if !q.is_empty() => NodeRef::Label(q.clone()),
            Some(TokenKind::Word(w)) => NodeRef::Label(w.clone()),
            _ => return Err(self.error(vec![REF.to_string()])),
        };
        self.pos += 1;
        Ok(r)
    }

    fn curie(&mut self) -> Result<NodeRef, ParseError> {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Curie(c)) => {
                let r = NodeRef::Curie(c.clone());
                self.pos += 1;
                Ok(r)
            }
            _ => Err(self.error(vec!["CURIE".to_string()])),
        }
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        match self.peek().map(|t| &t.kind) {
            Some(TokenKind::Quoted(q)) => {
                let q = q.clone();
                self.pos += 1;
                Ok(q)
            }
            _ => Err(self.error(vec![QUOTED.to_string()])),
        }
    }

    fn at_quoted(&self) -> bool {
        matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Quoted(_)))
    }

    /// Succeeds only at end of input; `alternatives` are the optional
    /// continuations that were also acceptable at this point.
    fn finish(&self, alternatives: &[&str]) -> Result<(), ParseError> {
        if self.peek().is_none() {
            return Ok(());
        }
        let mut expected: Vec<String> = alternatives.iter().map(|a| kw(a)).collect();
        expected.push(END.to_string());
        Err(self.error(expected))
    }

    fn command(&mut self) -> Result<ChangeKind, ParseError> {
        let Some(word) = self.peek_word().map(str::to_string) else {
            return Err(self.error(COMMANDS.iter().map(|c| kw(c)).collect()));
        };
        if !COMMANDS.contains(&word.as_str()) {
            return Err(self.error(COMMANDS.iter().map(|c| kw(c)).collect()));
        }
        self.pos += 1;
        match word.as_str() {
            "rename" => self.rename(),
            "obsolete" => self.obsolete(),
            "delete" => self.delete(),
            "create" => self.create(),
            "replace" => self.replace(),
            "add" => self.add(),
            "remove" => self.remove(),
            "change" => self.change(),
            "move" => self.node_move(),
            _ => unreachable!("checked against COMMANDS"),
        }
    }

    fn rename(&mut self) -> Result<ChangeKind, ParseError> {
        let about_node = self.reference()?;
        let old_value = if self.eat("from") {
            let old = self.quoted()?;
            self.keyword("to")?;
            Some(old)
        } else if self.eat("to") {
            None
        } else {
            return Err(self.error(vec![kw("from"), kw("to")]));
        };
        let new_value = self.quoted()?;
        self.finish(&[])?;
        Ok(ChangeKind::NodeRename {
            about_node,
            old_value,
            new_value,
        })
    }

    fn obsolete(&mut self) -> Result<ChangeKind, ParseError> {
        let about_node = self.reference()?;
        let replacement = if self.eat("with") {
            self.keyword("replacement")?;
            Some(self.reference()?)
        } else {
            self.finish(&["with"])?;
            None
        };
        self.finish(&[])?;
        Ok(ChangeKind::NodeObsoletion {
            about_node,
            replacement,
        })
    }

    fn delete(&mut self) -> Result<ChangeKind, ParseError> {
        if self.eat("node") {
            let about_node = self.reference()?;
            self.finish(&[])?;
            Ok(ChangeKind::NodeDeletion { about_node })
        } else if self.eat("edge") {
            let (subject, predicate, object) = self.triple()?;
            Ok(ChangeKind::EdgeDeletion {
                subject,
                predicate,
                object,
            })
        } else {
            Err(self.error(vec![kw("node"), kw("edge")]))
        }
    }

    fn triple(&mut self) -> Result<(NodeRef, NodeRef, NodeRef), ParseError> {
        let s = self.reference()?;
        let p = self.reference()?;
        let o = self.reference()?;
        self.finish(&[])?;
        Ok((s, p, o))
    }

    fn create(&mut self) -> Result<ChangeKind, ParseError> {
        if self.at_quoted() {
            let label = self.quoted()?;
            self.finish(&[])?;
            return Ok(ChangeKind::ClassCreation {
                about_node: None,
                new_value: Some(label),
            });
        }
        if self.eat("node") {
            let id = self.curie()?;
            let label = if self.at_quoted() {
                Some(self.quoted()?)
            } else {
                None
            };
            if self.peek().is_some() && label.is_none() {
                return Err(self.error(vec![QUOTED.to_string(), END.to_string()]));
            }
            self.finish(&[])?;
            return Ok(ChangeKind::ClassCreation {
                about_node: Some(id),
                new_value: label,
            });
        }
        if self.eat("edge") {
            let (subject, predicate, object) = self.triple()?;
            return Ok(ChangeKind::EdgeCreation {
                subject,
                predicate,
                object,
            });
        }
        let scope = match self.peek_word().and_then(|w| w.parse::<SynonymScope>().ok()) {
            Some(scope) => {
                self.pos += 1;
                Some(scope)
            }
            None => None,
        };
        if !self.eat("synonym") {
            let mut expected = Vec::new();
            if scope.is_none() {
                expected.push(QUOTED.to_string());
                expected.extend(["node", "edge"].map(kw));
                expected.extend(SynonymScope::ALL.map(|s| kw(s.as_str())));
            }
            expected.push(kw("synonym"));
            return Err(self.error(expected));
        }
        let new_value = self.quoted()?;
        self.keyword("for")?;
        let about_node = self.reference()?;
        self.finish(&[])?;
        Ok(ChangeKind::NewSynonym {
            about_node,
            new_value,
            scope,
        })
    }

    fn replace(&mut self) -> Result<ChangeKind, ParseError> {
        self.keyword("synonym")?;
        let old_value = self.quoted()?;
        self.keyword("with")?;
        let new_value = self.quoted()?;
        self.keyword("for")?;
        let about_node = self.reference()?;
        self.finish(&[])?;
        Ok(ChangeKind::SynonymReplacement {
            about_node,
            old_value,
            new_value,
        })
    }

    fn add(&mut self) -> Result<ChangeKind, ParseError> {
        self.keyword("definition")?;
        let new_value = self.quoted()?;
        self.keyword("to")?;
        let about_node = self.reference()?;
        self.finish(&[])?;
        Ok(ChangeKind::NewTextDefinition {
            about_node,
            new_value,
        })
    }

    fn remove(&mut self) -> Result<ChangeKind, ParseError> {
        if self.eat("definition") {
            self.keyword("for")?;
            let about_node = self.reference()?;
            self.finish(&[])?;
            Ok(ChangeKind::RemoveTextDefinition { about_node })
        } else if self.eat("synonym") {
            let old_value = self.quoted()?;
            self.keyword("for")?;
            let about_node = self.reference()?;
            self.finish(&[])?;
            Ok(ChangeKind::RemoveSynonym {
                about_node,
                old_value,
            })
        } else {
            Err(self.error(vec![kw("definition"), kw("synonym")]))
        }
    }

    fn change(&mut self) -> Result<ChangeKind, ParseError> {
        if self.eat("definition") {
            self.keyword("of")?;
            let about_node = self.reference()?;
            let old_value = if self.eat("from") {
                let old = self.quoted()?;
                self.keyword("to")?;
                Some(old)
            } else if self.eat("to") {
                None
            } else {
                return Err(self.error(vec![kw("from"), kw("to")]));
            };
            let new_value = self.quoted()?;
            self.finish(&[])?;
            Ok(ChangeKind::NodeTextDefinitionChange {
                about_node,
                old_value,
                new_value,
            })
        } else if self.eat("relationship") {
            self.keyword("between")?;
            let subject = self.reference()?;
            self.keyword("and")?;
            let object = self.reference()?;
            self.keyword("from")?;
            let old_value = self.reference()?;
            self.keyword("to")?;
            let new_value = self.reference()?;
            self.finish(&[])?;
            Ok(ChangeKind::PredicateChange {
                subject,
                object,
                old_value,
                new_value,
            })
        } else {
            Err(self.error(vec![kw("definition"), kw("relationship")]))
        }
    }

    fn node_move(&mut self) -> Result<ChangeKind, ParseError> {
        let about_node = self.reference()?;
        self.keyword("from")?;
        let old_value = self.reference()?;
        self.keyword("to")?;
        let new_value = self.reference()?;
        let predicate = if self.eat("with") {
            self.keyword("predicate")?;
            Some(self.reference()?)
        } else {
            self.finish(&["with"])?;
            None
        };
        self.finish(&[])?;
        Ok(ChangeKind::NodeMove {
            about_node,
            old_value,
            new_value,
            predicate,
        })
    }
}

/// Parses a single command into a [`Change`].
pub fn parse_command(text: &str) -> Result<Change, ParseError> {
    let lexed = tokenize(text)?;
    let mut parser = Parser {
        tokens: lexed.tokens,
        pos: 0,
        end: lexed.end,
    };
    parser.command().map(Change::new)
}

/// Parses one command per line. Blank lines and `#` comment lines are
/// skipped. All failing lines are reported, with their line numbers.
pub fn parse_document(text: &str) -> Result<ChangeSet, ParseErrors> {
    let mut changes = Vec::new();
    let mut errors = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let trimmed = line.trim_start();
        if trimmed.trim_end().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_command(line) {
            Ok(change) => changes.push(change),
            Err(mut e) => {
                e.span.line = index + 1;
                errors.push(e);
            }
        }
    }
    if errors.is_empty() {
        Ok(ChangeSet::new(changes))
    } else {
        Err(ParseErrors(errors))
    }
}
