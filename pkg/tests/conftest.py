from hypothesis import settings

# exhaustive inner loops make single examples slow on a small machine
settings.register_profile("repo", deadline=None, derandomize=True)
settings.load_profile("repo")
