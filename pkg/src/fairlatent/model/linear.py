"""Learnable components: the encoder/decoder (generator), the linear
critic and the ridge logistic classifier.

All states are immutable values; updates return new states. Gradients
are exact closed forms.

The encoder is a stack of dense layers with rectified hidden layers and
a linear output; in its default (linear) form it is the single map
`Z = X·A + b_enc`, decoded by `X̂ = Z·B + b_dec`.

"""
import dataclasses
import typing

import numpy as np
from scipy import optimize, special

from fairlatent.error import FairLatentError


class ModelError(FairLatentError):

    code = 'model'


@dataclasses.dataclass(frozen=True, eq=False)
class Dense:
    """Affine layer `h ↦ h·W + b`."""
    W: np.ndarray
    b: np.ndarray

    def __iter__(self):
        yield self.W
        yield self.b


@dataclasses.dataclass(frozen=True, eq=False, repr=False)
class EncoderState:
    """Encoder & decoder layer stacks.

    The encoder maps m features to d latent dimensions; the decoder maps
    back. Hidden layers (if any) are rectified.

    """
    encoder: typing.Tuple[Dense, ...]
    decoder: typing.Tuple[Dense, ...]

    def __post_init__(self):
        object.__setattr__(self, 'encoder', tuple(self.encoder))
        object.__setattr__(self, 'decoder', tuple(self.decoder))

        if self.d > self.m:
            raise ModelError(f"latent dimension {self.d} exceeds feature count {self.m}",
                             code='dimension')

        if not all(np.isfinite(array).all() for array in self.arrays()):
            raise ModelError("encoder state has non-finite entries", code='finite')

    def __repr__(self):
        shape = ' → '.join(str(layer.W.shape[1]) for layer in self.encoder)
        return f'<EncoderState: {self.m} → {shape}>'

    @property
    def m(self):
        return self.encoder[0].W.shape[0]

    @property
    def d(self):
        return self.encoder[-1].W.shape[1]

    @property
    def nonlinear(self):
        return len(self.encoder) > 1

    def _single(self, layers):
        if self.nonlinear:
            raise ModelError("defined for the linear encoder only", code='dimension')

        (layer,) = layers
        return layer

    @property
    def A(self):
        return self._single(self.encoder).W

    @property
    def B(self):
        return self._single(self.decoder).W

    @property
    def b_enc(self):
        return self._single(self.encoder).b

    @property
    def b_dec(self):
        return self._single(self.decoder).b

    def arrays(self):
        """All parameter arrays, encoder layers first."""
        for layer in self.encoder + self.decoder:
            yield from layer

    def named_arrays(self):
        for (stack, layers) in (('encoder', self.encoder), ('decoder', self.decoder)):
            for (index, layer) in enumerate(layers):
                yield (f'{stack}.{index}.W', layer.W)
                yield (f'{stack}.{index}.b', layer.b)

    def map(self, func, *others):
        """New state from applying `func` to corresponding arrays of this
        state and `others` (of identical structure).

        """
        def stack(layers, *other_stacks):
            return tuple(
                Dense(func(layer.W, *(other.W for other in group)),
                      func(layer.b, *(other.b for other in group)))
                for (layer, *group) in zip(layers, *other_stacks)
            )

        return dataclasses.replace(
            self,
            encoder=stack(self.encoder, *(other.encoder for other in others)),
            decoder=stack(self.decoder, *(other.decoder for other in others)),
        )

    def step(self, gradient, mu, bias=True):
        """Gradient-descent update `θ - μ·∇θ`.

        With `bias` false, bias vectors are held fixed.

        """
        if bias:
            return self.map(lambda value, grad: value - mu * grad, gradient)

        def update(layers, grads):
            return tuple(Dense(layer.W - mu * grad.W, layer.b)
                         for (layer, grad) in zip(layers, grads))

        return dataclasses.replace(self,
                                   encoder=update(self.encoder, gradient.encoder),
                                   decoder=update(self.decoder, gradient.decoder))


@dataclasses.dataclass(frozen=True, eq=False)
class CriticState:
    """Linear critic `z ↦ w·z` with clipping bound `c_clip`."""
    w: np.ndarray
    c_clip: float = 0.1

    def __post_init__(self):
        if not self.c_clip > 0:
            raise ModelError(f"clipping bound must be positive: {self.c_clip!r}",
                             code='critic')

    @property
    def d(self):
        return len(self.w)


@dataclasses.dataclass(frozen=True, eq=False)
class ClassifierState:
    """Ridge logistic regression `z ↦ sigmoid(z·W + b)`."""
    W: np.ndarray
    b: float
    lam: float = 0.0

    def __post_init__(self):
        if self.lam < 0:
            raise ModelError(f"regularization strength must be non-negative: {self.lam!r}",
                             code='classifier')

        if not (np.isfinite(self.W).all() and np.isfinite(self.b)):
            raise ModelError("classifier state has non-finite entries", code='finite')


#
# generator
#

def _uniform_layer(rng, fan_in, fan_out):
    bound = 1 / np.sqrt(fan_in)
    return Dense(rng.uniform(-bound, bound, size=(fan_in, fan_out)), np.zeros(fan_out))


def init_encoder(m, d, rng, hidden=None):
    """Initialize an encoder of m features and d latent dimensions.

    Weights are uniform in ±1/√fan-in and biases zero. With `hidden`,
    one rectified hidden layer of that width is inserted in both the
    encoder and the decoder.

    """
    if not 1 <= d <= m:
        raise ModelError(f"latent dimension must lie in [1, {m}]: {d}", code='dimension')

    if hidden:
        encoder = (_uniform_layer(rng, m, hidden), _uniform_layer(rng, hidden, d))
        decoder = (_uniform_layer(rng, d, hidden), _uniform_layer(rng, hidden, m))
    else:
        encoder = (_uniform_layer(rng, m, d),)
        decoder = (_uniform_layer(rng, d, m),)

    return EncoderState(encoder, decoder)


def _forward(layers, X):
    """Activations of each layer of the stack (input first)."""
    activations = [X]
    last = len(layers) - 1

    for (index, layer) in enumerate(layers):
        h = activations[-1] @ layer.W + layer.b
        if index < last:
            h = np.maximum(h, 0.0)
        activations.append(h)

    return activations


def _backward(layers, activations, delta):
    """Gradients of the stack's layers given the gradient `delta` with
    respect to its output; also returns the gradient for its input.

    """
    grads = [None] * len(layers)

    for index in reversed(range(len(layers))):
        layer = layers[index]
        grads[index] = Dense(activations[index].T @ delta, delta.sum(axis=0))
        delta = delta @ layer.W.T
        if index > 0:
            delta = delta * (activations[index] > 0)

    return (tuple(grads), delta)


def _check_features(enc, X):
    X = np.asarray(X, dtype=float)

    if X.ndim != 2 or X.shape[1] != enc.m:
        raise ModelError(f"expected {enc.m} feature columns, got shape {X.shape}",
                         code='dimension')

    return X


def encode(enc, X):
    """Representation `Z` (n × d) of feature matrix `X` (n × m)."""
    return _forward(enc.encoder, _check_features(enc, X))[-1]


def decode(enc, Z):
    return _forward(enc.decoder, np.asarray(Z, dtype=float))[-1]


def reconstruction_loss(enc, X):
    """Mean squared reconstruction error over samples and features."""
    X = _check_features(enc, X)
    return float(np.mean((decode(enc, encode(enc, X)) - X) ** 2))


#
# critic
#

def _check_groups(X0, X1):
    if len(X0) == 0 or len(X1) == 0:
        raise ModelError("critic requires non-empty groups", code='empty-group')


def critic_gap(cr, enc, X0, X1):
    """L_D: mean critic value of group 0 less that of group 1."""
    _check_groups(X0, X1)
    return float(np.mean(encode(enc, X0) @ cr.w) - np.mean(encode(enc, X1) @ cr.w))


def clip(cr):
    """Project the critic's weights onto the box [−c, c]."""
    return dataclasses.replace(cr, w=np.clip(cr.w, -cr.c_clip, cr.c_clip))


def grad_critic(cr, enc, X0, X1):
    """∂L_D/∂w: the difference of the groups' mean representations."""
    _check_groups(X0, X1)
    return encode(enc, X0).mean(axis=0) - encode(enc, X1).mean(axis=0)


def grad_generator(enc, cr, X0, X1, alpha):
    """Gradient of `L_A + α·L_D` with respect to every encoder & decoder
    parameter, the critic held fixed.

    L_A is taken over the concatenation of both batches. Returns an
    `EncoderState` of gradients.

    """
    _check_groups(X0, X1)

    X = _check_features(enc, np.concatenate([X0, X1]))
    (n0, n) = (len(X0), len(X))

    enc_acts = _forward(enc.encoder, X)
    dec_acts = _forward(enc.decoder, enc_acts[-1])

    residual = dec_acts[-1] - X
    (dec_grads, delta) = _backward(enc.decoder, dec_acts, 2 * residual / residual.size)

    if alpha:
        critic_delta = np.empty_like(delta)
        critic_delta[:n0] = cr.w / n0
        critic_delta[n0:] = -cr.w / (n - n0)
        delta = delta + alpha * critic_delta

    (enc_grads, _delta) = _backward(enc.encoder, enc_acts, delta)

    return EncoderState(enc_grads, dec_grads)


#
# classifier
#

def _logistic_objective(theta, Z, y, lam):
    (W, b) = (theta[:-1], theta[-1])
    scores = Z @ W + b

    loss = np.mean(np.logaddexp(0.0, scores) - y * scores) + 0.5 * lam * (W @ W)

    residual = (special.expit(scores) - y) / len(y)
    grad = np.append(Z.T @ residual + lam * W, residual.sum())

    return (loss, grad)


def logreg_gradient(clf, Z, y):
    """Gradient of the regularized mean logistic loss at `clf`."""
    theta = np.append(clf.W, clf.b)
    (_loss, grad) = _logistic_objective(theta, np.asarray(Z, dtype=float),
                                        np.asarray(y, dtype=float), clf.lam)
    return grad


def logreg_fit(Z, y, lam, seed=0, *, tol=1e-6, max_iter=5000):
    """Fit ridge logistic regression to representation `Z` & labels `y`.

    Minimizes the mean logistic loss plus `(lam / 2)·‖W‖²` (the bias is
    not penalized) by L-BFGS, from a seeded near-zero start, until the
    gradient norm falls below `tol` or `max_iter` is reached.

    """
    Z = np.asarray(Z, dtype=float)
    y = np.asarray(y, dtype=float)

    if Z.ndim != 2 or len(Z) != len(y):
        raise ModelError(f"representation shape {Z.shape} does not match {len(y)} labels",
                         code='dimension')

    if len(y) < 2 or len(np.unique(y)) < 2:
        raise ModelError("classifier requires both label values", code='single-class')

    rng = np.random.default_rng(seed)
    theta0 = np.append(rng.uniform(-1e-3, 1e-3, size=Z.shape[1]), 0.0)

    result = optimize.minimize(
        _logistic_objective,
        theta0,
        args=(Z, y, lam),
        jac=True,
        method='L-BFGS-B',
        # per-component bound implying the norm bound
        options={'maxiter': max_iter, 'gtol': tol / np.sqrt(len(theta0)), 'ftol': 0.0},
    )

    return ClassifierState(result.x[:-1], float(result.x[-1]), lam)


_SCORE_EPS = np.finfo(float).epsneg


def logreg_score(clf, Z):
    """Classification scores `sigmoid(Z·W + b)`, strictly within (0, 1)."""
    Z = np.asarray(Z, dtype=float)

    if Z.ndim != 2 or Z.shape[1] != len(clf.W):
        raise ModelError(f"expected {len(clf.W)} representation columns, got shape {Z.shape}",
                         code='dimension')

    scores = special.expit(Z @ clf.W + clf.b)
    return np.clip(scores, np.finfo(float).tiny, 1 - _SCORE_EPS)


def lipschitz_bound(clf):
    """Lipschitz constant `‖W‖₂ / 4` of the classifier's score function
    (the sigmoid's slope is at most 1/4).

    """
    return float(np.linalg.norm(clf.W) / 4)
