"""Built-in desk-scale experiment suites, one INI text per CLI subcommand."""

VERIFY = """
[partition-unity-1d]
experiment = partition-unity
seed = 0
dim = 1
n = 64

[partition-unity-2d]
experiment = partition-unity
seed = 0
dim = 2
n = 64

[lebesgue-norm]
seed = 0
samples = 200
n = 32

[leray]
seed = 0
samples = 10
dim = 3
n = 32

[critical-scaling]
seed = 0
samples = 5
alpha = 1.5
p0 = 2.5

[function-spaces]
seed = 0
samples = 20
refine = 2
"""

HEAT = """
[linear-estimate]
seed = 0
samples = 20
dim = 2
n = 64
alpha = 1.5
nodes = 200
horizons = 0.1, 1, 10, 40
rho1 = 1, 2, inf
"""

NSE = """
[bilinear-nse]
experiment = bilinear
system = nse
seed = 0
samples = 20
refine = 2

[fixed-point-nse]
experiment = fixed-point
system = nse
seed = 0
samples = 10
margin = 0.5
"""

KS = """
[bilinear-ks]
experiment = bilinear
system = keller_segel
seed = 0
samples = 20
refine = 2

[fixed-point-ks]
experiment = fixed-point
system = keller_segel
seed = 0
samples = 10
margin = 0.5
"""

SWEEP = """
[sweep-nse]
experiment = smallness-sweep
system = nse
seed = 0
samples = 20
epsilons = 0.25, 0.5, 1, 2, 4, 8, 16, 32

[sweep-ks]
experiment = smallness-sweep
system = keller_segel
alpha = 1.2
seed = 0
samples = 20
epsilons = 0.25, 0.5, 1, 2, 4, 8, 16, 32
blowup_eps = 1000
"""

SUITES = {"verify": VERIFY, "heat": HEAT, "nse": NSE, "ks": KS, "sweep": SWEEP}
