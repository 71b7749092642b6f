# Ridge-regression oracle for the SureMap estimators
