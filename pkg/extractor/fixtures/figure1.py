# Experimental Environment of Interest
training_slice = None
validation_slice = None
testing_slice = None
model = None


# Data Processing
def load_training_slice(dataset):
    ...


def load_validation_slice(dataset):
    ...


def load_testing_slice(dataset):
    ...


# Model Design & API
def create_model():
    ...


def forward_pass(model, x):  # llx: atom f1
    return model(x)  # llx: resource m


def forward_sampling_pass(model, x, t):  # llx: atom f2
    return model(x, t).sample  # llx: resource m


# Experimental Phases
def training():  # llx: atom t
    ...
    if needs_sampling:
        model_output = forward_sampling_pass(model, x, t)
    else:
        model_output = forward_pass(model, x)
    ...


def validation():
    ...


def testing():
    ...
