# Writes a seeded 500-word paragraph and its token count under the
# word-run segmentation rule, counted with a regular expression.
import json, os, random, re
d = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "text")
rng = random.Random(500)
words = ["the", "parser", "returns", "a", "tree", "node_id", "x1", "value", "config", "token", "smell", "loop",
         "42", "3.14", "don't", "e-mail", "foo(bar)", "a+b", "list[0]", "naïve", "café", "x_y_z", "end.", "(see", "note)"]
text = " ".join(rng.choice(words) for _ in range(500))
os.makedirs(d, exist_ok=True)
with open(os.path.join(d, "paragraph_500.txt"), "w") as f:
    f.write(text + "\n")
count = len(re.findall(r"\w+|[^\s\w]", text))
with open(os.path.join(d, "expected.json"), "w") as f:
    json.dump({"paragraph_500.txt": {"words": 500, "tokens": count}}, f, indent=2)
    f.write("\n")
