"""Export tooling that feeds the news-similarity engine: document embeddings,
entity mentions, and fulfilled translations, all in the engine's file formats."""

__version__ = "0.1.0"
