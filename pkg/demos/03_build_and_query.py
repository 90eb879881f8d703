"""Build an index over the bundled demo corpus and rank recommendations for
an unfinished draft, showing the per-feature score breakdown.

Run from the repository root:  python demos/03_build_and_query.py
"""

from pathlib import Path

from apirec import BuildConfig, FusionConfig, build_index, parse_draft, rank_endpoints

DATA = Path(__file__).parent / "data"

# The demo corpus is tiny, so the document-frequency filters are disabled;
# production defaults (10 tree / 15 keyword) assume thousands of endpoints.
index = build_index(DATA, BuildConfig(min_df_tree=1, min_df_keyword=1))
report = index.ingest_report
print(f"indexed {report.unique_endpoints} endpoints from {report.files_parsed} specs "
      f"({len(index.tree_vocab)} tree tokens, {len(index.keyword_vocab)} keyword tokens)")

draft = parse_draft("""
/songs/{id}/albm:
  get:
    summary: get album of a song
    parameters:
      - name: songID
        in: path
""")
print(f"\ndraft endpoint: {draft.endpoint_name}  (misspelled, partial: that is fine)")

config = FusionConfig(enabled_features=("tree", "text", "fuzzy"),
                      tree_featurization="ppmi", text_featurization="tfidf")
print(f"fusion weights: {config.weights} + quality {config.quality_weight}\n")

for position, result in enumerate(rank_endpoints(draft, index, config, top_k=5), start=1):
    contributions = ", ".join(f"{name}={value:.3f}" for name, value in result.feature_breakdown.items())
    print(f"{position}. {result.name}")
    print(f"   probability {result.normalized_probability:.4f}  raw {result.raw_score:.4f}  ({contributions})")
