//! Text queries built from a record's question and answer fields.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

/// Which fields of a question/answer record make up the query text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryMode {
    Answer,
    QuestionAnswer,
    Question,
}

impl QueryMode {
    pub const ALL: [QueryMode; 3] = [QueryMode::Answer, QueryMode::QuestionAnswer, QueryMode::Question];

    pub fn as_str(self) -> &'static str {
        match self {
            QueryMode::Answer => "answer",
            QueryMode::QuestionAnswer => "qa",
            QueryMode::Question => "question",
        }
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for QueryMode {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "answer" | "a" | "clip-a" => Ok(QueryMode::Answer),
            "qa" | "question-answer" | "question_answer" | "clip-qa" => Ok(QueryMode::QuestionAnswer),
            "question" | "q" | "clip-q" => Ok(QueryMode::Question),
            _ => Err(QueryError::UnknownMode(String::from(s))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("empty query for mode {0}")]
    Empty(QueryMode),
    #[error("token budget must be at least 1")]
    ZeroBudget,
    #[error("unknown query mode {0:?}")]
    UnknownMode(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextQuery {
    pub text: String,
    pub mode: QueryMode,
    /// Set when the text was cut to fit the token budget.
    pub truncated: bool,
}

/// Builds the query text for `mode`.
///
/// Question and answer are joined by a single space in `QuestionAnswer`
/// mode. Tokens are whitespace-delimited; text over `token_budget` tokens
/// is cut right after the last token that fits.
pub fn build_text_query(
    question: &str,
    answer: &str,
    mode: QueryMode,
    token_budget: usize,
) -> Result<TextQuery, QueryError> {
    if token_budget == 0 {
        return Err(QueryError::ZeroBudget);
    }
    let (question, answer) = (question.trim(), answer.trim());
    let joined = match mode {
        QueryMode::Answer => String::from(answer),
        QueryMode::Question => String::from(question),
        QueryMode::QuestionAnswer => match (question.is_empty(), answer.is_empty()) {
            (false, false) => {
                let mut s = String::with_capacity(question.len() + 1 + answer.len());
                s.push_str(question);
                s.push(' ');
                s.push_str(answer);
                s
            }
            (false, true) => String::from(question),
            _ => String::from(answer),
        },
    };
    if joined.is_empty() {
        return Err(QueryError::Empty(mode));
    }
    match joined.split_whitespace().nth(token_budget) {
        Some(_) => {
            let last = joined.split_whitespace().nth(token_budget - 1).unwrap_or_default();
            let end = last.as_ptr() as usize - joined.as_ptr() as usize + last.len();
            Ok(TextQuery { text: String::from(&joined[..end]), mode, truncated: true })
        }
        None => Ok(TextQuery { text: joined, mode, truncated: false }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec::Vec;

    #[test]
    fn question_answer_concatenates() {
        let q = build_text_query("What color?", "Red.", QueryMode::QuestionAnswer, 77).unwrap();
        assert_eq!(q.text, "What color? Red.");
        assert!(!q.truncated);
    }

    #[test]
    fn answer_mode_ignores_empty_question() {
        let q = build_text_query("", "Red.", QueryMode::Answer, 77).unwrap();
        assert_eq!(q.text, "Red.");
        assert!(!q.truncated);
    }

    #[test]
    fn empty_mode_field_is_an_error() {
        let err = build_text_query("Q?", "", QueryMode::Answer, 77).unwrap_err();
        assert_eq!(err, QueryError::Empty(QueryMode::Answer));
        assert_eq!(format!("{err}"), "empty query for mode answer");
        assert_eq!(build_text_query("Q", "A", QueryMode::Question, 0), Err(QueryError::ZeroBudget));
    }

    #[test]
    fn long_question_is_truncated_to_budget() {
        let question: Vec<String> = (0..100).map(|i| format!("w{i}")).collect();
        let question = question.join(" ");
        let q = build_text_query(&question, "x", QueryMode::QuestionAnswer, 77).unwrap();
        assert!(q.truncated);
        let tokens: Vec<&str> = q.text.split(' ').collect();
        assert_eq!(tokens.len(), 77);
        assert_eq!(tokens[0], "w0");
        assert_eq!(tokens[76], "w76");
    }

    #[test]
    fn mode_names_parse() {
        for m in QueryMode::ALL {
            assert_eq!(m.as_str().parse::<QueryMode>().unwrap(), m);
        }
        assert_eq!("CLIP-QA".parse::<QueryMode>().unwrap(), QueryMode::QuestionAnswer);
        assert!("both".parse::<QueryMode>().is_err());
    }

    proptest::proptest! {
        #[test]
        fn qa_text_starts_with_question_text(q in "[a-z ?]{0,40}", a in "[a-z .]{0,40}", budget in 1usize..100) {
            if let (Ok(qa), Ok(qo)) = (
                build_text_query(&q, &a, QueryMode::QuestionAnswer, budget),
                build_text_query(&q, &a, QueryMode::Question, budget),
            ) {
                proptest::prop_assert!(qa.text.starts_with(&qo.text));
            }
        }

        #[test]
        fn truncation_never_empties(words in proptest::collection::vec("[a-z]{1,6}", 1..200), budget in 1usize..80) {
            let text = words.join(" ");
            let q = build_text_query(&text, "", QueryMode::Question, budget).unwrap();
            proptest::prop_assert!(!q.text.is_empty());
            proptest::prop_assert_eq!(q.truncated, words.len() > budget);
            proptest::prop_assert_eq!(q.text.split_whitespace().count(), words.len().min(budget));
        }
    }
}
