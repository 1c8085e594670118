"""Registries of the pipeline steps of each fairlatent command."""


#: command name → description
DESCRIPTIONS = {
    'prepare': "preprocess a CSV into a prepared dataset directory",
    'train': "train a representation method and write its checkpoint",
    'evaluate': "score a representation by the evaluation protocol",
    'compare': "evaluate the baseline methods and the fair representation side by side",
    'audit': "inject label bias by flipping and measure its discovery",
    'sweep': "evaluate a method across values of one parameter",
}

#: command name → step registry
COMMANDS = {name: set() for name in DESCRIPTIONS}


def registries(*names):
    """Step registries of the named commands (all commands by default)."""
    return tuple(COMMANDS[name] for name in (names or COMMANDS))
