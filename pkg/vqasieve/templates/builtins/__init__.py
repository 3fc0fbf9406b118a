# Built-in question templates
