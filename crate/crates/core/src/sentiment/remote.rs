//! Remote annotation client contract. The transport hides the wire protocol;
//! annotation services plug in behind it and are normally combined with
//! [`super::cache::AnnotationCache`] so reruns stay offline.

use super::{Annotation, Annotator, SentimentError};

/// Request one text's annotation from an external service. Implementations
/// should surface transient failures as retryable [`SentimentError::Remote`].
pub trait AnnotationTransport: Send + Sync {
    fn request(&self, text: &str) -> Result<Annotation, SentimentError>;
}

/// An annotator backed by an [`AnnotationTransport`]. Not deterministic:
/// remote models may change between calls.
pub struct RemoteAnnotator {
    name: String,
    transport: Box<dyn AnnotationTransport>,
}

impl RemoteAnnotator {
    pub fn new(name: impl Into<String>, transport: Box<dyn AnnotationTransport>) -> RemoteAnnotator {
        RemoteAnnotator {
            name: name.into(),
            transport,
        }
    }
}

impl Annotator for RemoteAnnotator {
    fn name(&self) -> &str {
        &self.name
    }

    fn deterministic(&self) -> bool {
        false
    }

    fn annotate(&self, text: &str) -> Result<Annotation, SentimentError> {
        if text.trim().is_empty() {
            return Err(SentimentError::EmptyText);
        }
        let annotation = self.transport.request(text)?;
        if !(-1.0..=1.0).contains(&annotation.sentiment) {
            return Err(SentimentError::ScoreOutOfRange(annotation.sentiment));
        }
        Ok(annotation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    struct Fixed(f64);

    impl AnnotationTransport for Fixed {
        fn request(&self, _text: &str) -> Result<Annotation, SentimentError> {
            Ok(Annotation {
                sentiment: self.0,
                entities: BTreeSet::new(),
            })
        }
    }

    struct Failing;

    impl AnnotationTransport for Failing {
        fn request(&self, text: &str) -> Result<Annotation, SentimentError> {
            Err(SentimentError::Remote {
                context: text.chars().take(8).collect(),
                message: "connection reset".into(),
                retryable: true,
            })
        }
    }

    #[test]
    fn transport_results_pass_through_with_range_check() {
        let good = RemoteAnnotator::new("mock", Box::new(Fixed(0.5)));
        assert_eq!(good.annotate("testo").unwrap().sentiment, 0.5);
        assert!(!good.deterministic());

        let bad = RemoteAnnotator::new("mock", Box::new(Fixed(1.5)));
        assert!(matches!(
            bad.annotate("testo"),
            Err(SentimentError::ScoreOutOfRange(_))
        ));
    }

    #[test]
    fn failures_are_retryable_errors() {
        let failing = RemoteAnnotator::new("mock", Box::new(Failing));
        match failing.annotate("qualcosa").unwrap_err() {
            SentimentError::Remote { retryable, .. } => assert!(retryable),
            other => panic!("unexpected {other:?}"),
        }
    }
}
