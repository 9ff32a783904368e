"""A compositional invariant for a symmetric lock ring.  Needs z3 on PATH."""
from pathlib import Path

from ipsmp import reductions as R
from ipsmp.frontend import expr_text, load_file, parse_expr

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# %% One process sees its left lock, its state and its right lock.
ring = load_file(CORPUS / "ring.imp", require_main=False)
inst = R.reduce(R.RING, ring)
print(inst.text())

# %% The generated instance has Inv as its only unknown, bounded below by init.
checked = inst.checked()
print("partial:", checked.partial, " template:", expr_text(checked.template("Inv")))

# %% A hand-written invariant passes; init on its own is not closed under steps.
enums = ring.program.enums
for text in ["s == Try || (l == Left && r == Right)", "l == Free && s == Try && r == Free"]:
    print(f"{text:45} ->", R.check_solution(R.RING, ring, parse_expr(text, enums)))
