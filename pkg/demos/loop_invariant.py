"""Loop invariant inference as predicate synthesis.  Needs z3 on PATH."""
import json
from pathlib import Path

from ipsmp import reductions as R
from ipsmp.frontend import expr_text, load_file
from ipsmp.vcgen import solve

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# %% y advances twice as fast as i; the final assertion needs an invariant.
source = load_file(CORPUS / "doubling.imp")

# %% Split the invariant into two pieces over (x, i) and (i, y).
shape = R.parse_shape(json.loads((CORPUS / "doubling.shape.json").read_text()))
inst = R.reduce(R.LOOP, source, shape)
print(inst.text())

# %% Solve the synthesis instance and read the pieces back.
result = solve(inst.checked())
print(result.status)
for name, expr in sorted(result.predicates.items()):
    print(f"  {name} := {expr_text(expr)}")

# %% The assembled invariant is checked against the loop directly, not via the instance.
inv = R.invariant_formula(inst, result.predicates)
print("invariant:", expr_text(inv), "valid:", R.check_solution(R.LOOP, source, inv))
