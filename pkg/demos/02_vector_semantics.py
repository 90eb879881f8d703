"""Show the vector machinery on a five-endpoint toy corpus: TF-IDF weights,
the PPMI co-occurrence matrix, and how the PPMI-weighted cosine rewards
correlated (not just identical) tokens.

Run from the repository root:  python demos/02_vector_semantics.py
"""

from collections import Counter

import numpy as np

from apirec import build_ppmi, build_vocabulary, cosine, ppmi_cosine, tfidf_vector
from apirec.vectorize import count_vector

bags = [
    Counter({"parameters_firstname": 1, "parameters_lastname": 1}),
    Counter({"parameters_firstname": 1, "parameters_lastname": 1}),
    Counter({"parameters_firstname": 1, "parameters_phone": 1}),
    Counter({"parameters_lastname": 1, "parameters_email": 1}),
    Counter({"parameters_limit": 1, "parameters_offset": 1}),
]

vocab = build_vocabulary(bags, min_df=1)
print("vocabulary:", list(vocab.tokens))
print("document frequencies:", dict(zip(vocab.tokens, vocab.doc_freq)))

print("\nTF-IDF vectors (rare tokens weigh more):")
for i, bag in enumerate(bags):
    vec = tfidf_vector(bag, vocab, len(bags))
    weights = {vocab.tokens[j]: round(v, 3) for j, v in zip(vec.indices.tolist(), vec.values.tolist())}
    print(f"  endpoint {i}: {weights}")

q = build_ppmi(bags, vocab)
np.set_printoptions(precision=2, suppress=True)
print("\nPPMI matrix (positive cells mark tokens that co-occur above chance):")
print(q.matrix.toarray())

x = count_vector(bags[2], vocab)  # firstname + phone
y = count_vector(bags[3], vocab)  # lastname + email
print("\nendpoints 2 and 3 share no token:")
print(f"  plain cosine        : {cosine(x, y):.3f}")
print(f"  PPMI-weighted cosine: {ppmi_cosine(x, y, q):.3f}")
print("firstname and lastname co-occur in the corpus, so the PPMI kernel")
print("still finds the two endpoints related.")
