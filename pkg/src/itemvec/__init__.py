"""item2vec item embeddings."""
