"""Walk through parsing one OpenAPI 2.0 document into endpoint trees and
grading its quality with the rubric.

Run from the repository root:  python demos/01_parse_and_quality.py
"""

from pathlib import Path

from apirec import (
    build_definitions_dict,
    extract_endpoint_trees,
    extract_text,
    parse_spec,
    score_info,
    score_paths,
    score_spec,
    tree_path_tokens,
)

DATA = Path(__file__).parent / "data"

doc = parse_spec((DATA / "music_library.json").read_bytes(), "json", source_id="music_library.json")
print(f"parsed {doc.source_id}: swagger {doc.swagger_version}, {len(doc.paths)} endpoints")

defs = build_definitions_dict(doc)
print(f"definitions dictionary: {sorted(defs)}")

trees = extract_endpoint_trees(doc, defs)
tree = next(t for t in trees if t.endpoint_name == "/songs/{songId}/artist")
print(f"\nendpoint {tree.endpoint_name}")
print("  operations:", sorted(tree.operations))

# The response schema's $ref to #/definitions/Artist is now inlined, so the
# tree carries the model's property names.
schema = tree.operations["get"]["responses"]["200"]["schema"]
print("  resolved response model:", schema["$model"], "->", sorted(schema["properties"]))

print("\ntree-path tokens (variable names prefixed with their context):")
for token, count in sorted(tree_path_tokens(tree).items()):
    print(f"  {token}  x{count}")

print("\noperation text used for keyword features:")
print(" ", extract_text(tree))

print("\nquality grades (required/expected key rubric):")
print(f"  info  : {score_info(doc):.3f}")
print(f"  paths : {score_paths(doc):.3f}")
print(f"  blend : {score_spec(doc):.3f}  (0.7 * paths + 0.3 * info)")
